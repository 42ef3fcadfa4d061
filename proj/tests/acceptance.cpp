// One PASS/FAIL line per acceptance check. Exit status is non-zero if any
// check fails. `acceptance N` runs only check N.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include "chaoscope/verification.hpp"

int main(int argc, char** argv)
{
  using namespace chaoscope::verify;
  int first = 1, last = check_count;
  if (argc > 1) {
    first = last = std::atoi(argv[1]);
    if (first < 1 || first > check_count) {
      std::cerr << "usage: acceptance [1-" << check_count << "]\n";
      return 2;
    }
  }
  Workbench wb;
  int failed = 0;
  for (int id = first; id <= last; ++id) {
    const auto r = run_check(id, wb);
    failed += !r.passed;
    std::cout << (r.passed ? "PASS" : "FAIL") << " [" << id << "] " << r.title << " (" << std::fixed
              << std::setprecision(2) << r.seconds << " s)\n";
    for (const auto& note : r.notes)
      std::cout << "      " << note << "\n";
  }
  std::cout << (last - first + 1 - failed) << "/" << (last - first + 1) << " checks passed\n";
  return failed == 0 ? 0 : 1;
}
