// Placeholder entry point; the real subcommand wiring lands with the engine.
#include <cstdio>

int main() {
  std::puts("ce-excavator: not wired up yet");
  return 3;
}
