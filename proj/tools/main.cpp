#include <cstdio>

int main() {
  std::puts("spinequad CLI placeholder");
  return 0;
}
