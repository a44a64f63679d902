#pragma once

#include "ctdelay/age_profile.hpp"
#include "ctdelay/curve.hpp"
#include "ctdelay/delay_kernel.hpp"
#include "ctdelay/errors.hpp"
#include "ctdelay/grid.hpp"
#include "ctdelay/quadrature.hpp"
#include "ctdelay/rates.hpp"
