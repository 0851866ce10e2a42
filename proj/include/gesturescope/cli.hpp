#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gesturescope {

/// Entry point shared by the gesturescope binary and the tests.
/// Subcommands: analyze, serve, export, synth.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gesturescope
