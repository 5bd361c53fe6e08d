#pragma once

namespace nilreg {

// command-line front end; returns the process exit status
int run_cli(int argc, const char* const* argv);

} // namespace nilreg
