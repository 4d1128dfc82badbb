#ifndef DAGPOST_CLI_HPP
#define DAGPOST_CLI_HPP

namespace dagpost {

/// Batch command-line entry point.  Returns 0 on success, 1 on usage errors
/// (with help text), 2 on numerical/capacity/domain failures.
int cli_main(int argc, const char* const* argv);

}  // namespace dagpost

#endif  // DAGPOST_CLI_HPP
