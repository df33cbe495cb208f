#pragma once

#include "nodice/core.hpp"
#include "nodice/surface.hpp"

#include <string>
#include <string_view>

namespace nodice {

/// Parses surface syntax. Throws ProgramError with a line/column position.
SurfaceProgram parse(std::string_view source);

/// Annotates every subexpression with its type and resolves integer widths.
SurfaceProgram typecheck(const SurfaceProgram& p);

/// Lowers integers, integer operators, boolean operators, uniform/choose and
/// multi-parameter functions to the Bool/tuple fragment.
SurfaceProgram desugar(const SurfaceProgram& p);

/// Converts a desugared program to A-normal form, binding intermediate
/// results left to right.
CoreProgram a_normalize(const SurfaceProgram& p);

/// parse, typecheck, desugar and a_normalize in one go.
CoreProgram load_program(std::string_view source);
CoreProgram load_program_file(const std::string& path);

/// Surface pretty printer. Its output parses back to the same tree.
std::string print_surface(const SurfaceProgram& p);
std::string print_surface(const SExpr& e);

}  // namespace nodice
