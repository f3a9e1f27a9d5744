// Placeholder during bring-up; replaced by the full criteria suite.
#include <cstdio>
int main() {
  std::puts("acceptance: suite under construction");
  return 1;
}
