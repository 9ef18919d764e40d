#pragma once

#include <string>

#include "lgc/estimation.hpp"

// FitResult <-> JSON.

namespace lgc {

std::string fit_to_json(const FitResult& fit);
FitResult fit_from_json(const std::string& text);

} // namespace lgc
