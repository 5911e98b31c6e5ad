#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cascade {

// Word-level vocabulary with four reserved special ids. Regular tokens are
// lowercase alphanumeric runs, so the bracketed special names can never
// collide with them.
class Vocab {
public:
  static constexpr std::int32_t kCls = 0;
  static constexpr std::int32_t kSep = 1;
  static constexpr std::int32_t kPad = 2;
  static constexpr std::int32_t kUnk = 3;

  Vocab(); // specials only

  // Ranks words by frequency over `texts` (ties broken lexicographically)
  // and keeps the top max_size - 4 after the specials.
  static Vocab build(const std::vector<std::string>& texts, std::size_t max_size);

  std::int32_t id_of(std::string_view token) const; // kUnk when absent
  const std::string& token_of(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }

  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;

  void append(std::string token);
};

} // namespace cascade
