#include <cstdio>

int main() {
  std::puts("noisebench: placeholder");
  return 0;
}
