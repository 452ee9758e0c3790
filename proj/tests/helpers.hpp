#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testutil {

// Fresh scratch directory per test, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    auto base = std::filesystem::temp_directory_path() / "thgrl_tests";
    std::filesystem::create_directories(base);
    static std::mt19937_64 gen{std::random_device{}()};
    path = base / std::to_string(gen());
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
