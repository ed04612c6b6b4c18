#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gpvol/gptree.hpp"

namespace gpvol::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Runs `gpvol <subcommand> ...`; argv[0] is the program name.
/// Returns 0 on success, 2 on user or validation errors, 1 otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Model file: "# binding=call|put" then the prefix expression.
struct ModelFile {
    ExprTree tree;
    TerminalBinding binding = TerminalBinding::Call;
};

std::string format_model_file(const ModelFile& model);
/// Throws ParseError.
ModelFile parse_model_file(std::string_view text);

/// Reads a model file or resolves the names builtin-call / builtin-put.
ModelFile load_model(const std::string& spec);

}  // namespace gpvol::cli
