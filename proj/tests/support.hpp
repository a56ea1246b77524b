#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <doctest.h>

#include "crowdtime/dataset.hpp"
#include "crowdtime/error.hpp"

namespace testing {

inline crowdtime::Dataset make(int C, const std::vector<crowdtime::JudgmentRecord>& records,
                               const std::map<std::string, int>& gold = {}) {
  return crowdtime::Dataset::from_records(crowdtime::LabelSpace(C), records,
                                          gold.empty() ? nullptr : &gold);
}

template <class F>
crowdtime::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const crowdtime::Error& e) {
    return e.kind();
  }
  FAIL("expected a crowdtime::Error");
  return crowdtime::ErrorKind::Numerical;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("crowdtime_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
