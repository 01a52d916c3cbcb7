#pragma once

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fgvc/tensor.hpp"

namespace fgvc::test {

// Fresh scratch directory per call, removed by the destructor.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("fgvc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline VideoTensor random_video(std::mt19937_64& rng, std::size_t f, std::size_t h, std::size_t w,
                                std::size_t c = 1) {
  VideoTensor v(f, h, w, c);
  v.data = random_vector(rng, v.data.size(), 0.0, 1.0);
  return v;
}

// Values exactly representable as 8-bit samples, so file round trips are lossless.
inline VideoTensor byte_video(std::mt19937_64& rng, std::size_t f, std::size_t h, std::size_t w,
                              std::size_t c = 1) {
  VideoTensor v(f, h, w, c);
  std::uniform_int_distribution<int> u(0, 255);
  for (double& x : v.data) x = u(rng) / 255.0;
  return v;
}

}  // namespace fgvc::test
