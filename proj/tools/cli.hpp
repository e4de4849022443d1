#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tgrip {

// Entry point behind the `tgrip` binary; split out so tests can drive the
// exact CLI surface with captured streams.
//
// Subcommands: calibrate, detect, simulate, replay, report.
// TGRIP_CONFIG names a default config file used when --config is absent.
int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace tgrip
