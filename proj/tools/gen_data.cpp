// Regenerates the bundled synthetic data files (data/*.csv) from their
// pinned generators. The shipped files are frozen outputs of this tool; a
// test asserts byte equality.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "slidesim/bundled.hpp"
#include "slidesim/trace_io.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "uncertainty_synthetic.csv", std::ios::binary);
    out << slidesim::uncertainty_trace_to_csv(slidesim::bundled_uncertainty_trace());
  }
  {
    std::ofstream out(dir / "wrench_trace_synthetic.csv", std::ios::binary);
    out << slidesim::wrench_trace_to_csv(slidesim::bundled_wrench_trace());
  }
  std::cout << "wrote " << (dir / "uncertainty_synthetic.csv").string() << "\n"
            << "wrote " << (dir / "wrench_trace_synthetic.csv").string() << "\n";
  return 0;
}
