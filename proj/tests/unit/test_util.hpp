#pragma once

#include "nodice/frontend.hpp"
#include "nodice/surface.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace nodice::testing {

struct Bundled {
  std::string name;
  std::string source;
  CoreProgram program;
};

inline std::string programs_dir() { return NODICE_PROGRAMS_DIR; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string program_source(const std::string& name) { return read_text(programs_dir() + "/" + name); }
inline CoreProgram bundled(const std::string& name) { return load_program(program_source(name)); }

/// Every .nd file under programs/, sorted by name.
inline std::vector<Bundled> bundled_programs() {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(programs_dir()))
    if (e.path().extension() == ".nd") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::vector<Bundled> out;
  for (const auto& n : names) {
    std::string src = program_source(n);
    out.push_back({n, src, load_program(src)});
  }
  return out;
}

inline Value lit(const CoreProgram& p, const std::string& text) {
  auto v = parse_value_literal(text, p.surface_output_type());
  if (!v) throw Error("bad literal " + text);
  return *v;
}

}  // namespace nodice::testing
