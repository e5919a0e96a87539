#ifndef FRAMECON_CLI_HPP
#define FRAMECON_CLI_HPP

#include <map>
#include <string>
#include <vector>

namespace framecon::cli {

inline constexpr const char* kVersion = "0.1.0";

// Flat key/value sections; the run-manifest uses the same format, so a
// manifest can be fed straight back through --config.
struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);
    std::string serialize() const;
};

// Full command-line entry point; args excludes the program name.
// Exit code 0 on success, 1 on domain/parameter errors, 2 on I/O errors.
int dispatch(const std::vector<std::string>& args);

}  // namespace framecon::cli

#endif
