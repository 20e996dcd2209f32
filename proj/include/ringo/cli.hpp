#pragma once

namespace ringo {

// Entry point of the command line tool. Returns the process exit code:
//   0 success, 1 configuration error, 2 infeasible plan,
//   3 failed run inside a comparison batch, 4 self-check failure.
int cliMain(int argc, const char* const* argv);

}  // namespace ringo
