#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gse::cli {

/// Merged settings: config file, then environment, then flags.
struct CliConfig {
    std::string store_path;
    std::string listen_addr = "127.0.0.1:8081";
    std::string model_url;
    std::string model_key;
    std::string model_name = "gpt-4o";
    std::string engine = "heuristic";
    std::string backend = "portable";
};

/// Reads `path` (YAML or JSON map with keys store, listen, model_url,
/// model_key, model_name, engine, backend). Throws gse::ParseError.
CliConfig load_config_file(const std::filesystem::path& path, CliConfig base = {});
/// Applies GSE_STORE_PATH, GSE_LISTEN_ADDR, GSE_MODEL_URL, GSE_MODEL_KEY,
/// GSE_MODEL_NAME.
CliConfig apply_environment(CliConfig base);
/// Config file from GSE_CONFIG or ./gse.config when present, then the
/// environment.
CliConfig default_config();

/// Runs one command line. Returns 0 on success, 1 on a domain error and 2 on
/// a usage error; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gse::cli
