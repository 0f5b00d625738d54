// Out-of-sample ordering on the Hang Seng index-tracking data. Exits 77
// (skipped) when the file is not available.
#include "hangseng_check.hpp"

#include <iostream>

int main() {
  const auto path = acceptance::hang_seng_path();
  if (!path) {
    std::cout << "Hang Seng data not found (set SIGA_HANGSENG_DATA or put indtrack1.txt in SIGA_DATA_DIR)\n";
    return 77;
  }
  try {
    const auto r = acceptance::hangseng_ordering(*path);
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.detail << "\n";
    return r.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cout << "FAIL " << e.what() << "\n";
    return 1;
  }
}
