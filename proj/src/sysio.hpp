#pragma once

#include "solver.hpp"

namespace polyinv {

// Canonical text form of a quadratic system (plus objective); importable.
std::string export_canonical(const QuadSystem& sys, const Objective& obj);

struct ImportedSystem {
  QuadSystem sys;
  Objective obj;
};
ImportedSystem import_canonical(const std::string& text);

// AMPL-style model text for external nonlinear solvers.
std::string export_ampl(const QuadSystem& sys, const Objective& obj, double eps_min);

}  // namespace polyinv
