#include <cstdio>

int main() {
  std::puts("hullopt: subcommands not wired up yet");
  return 1;
}
