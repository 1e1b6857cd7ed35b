#pragma once

#include "steerkit/error.hpp"
#include "steerkit/tolerances.hpp"
#include "steerkit/qstate.hpp"
#include "steerkit/steer_functional.hpp"
#include "steerkit/optimizer.hpp"
#include "steerkit/analytic.hpp"
#include "steerkit/bell_chsh.hpp"
#include "steerkit/geometry.hpp"
#include "steerkit/io.hpp"

namespace steerkit {
inline constexpr std::string_view kVersion = "0.1.0";
}
