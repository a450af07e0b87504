#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capstream/types.hpp"

namespace capstream {

// Remembers the textual names of keys so that samples can be written back
// with readable keys. A key without a known name is written as "#<id>".
class KeyNames {
 public:
  // "#<digits>" is a raw identifier; anything else is canonicalized.
  static KeyId resolve(std::string_view text);

  KeyId intern(std::string_view text);
  void remember(KeyId key, std::string_view name);
  std::string name(KeyId key) const;
  // Drops names of keys for which keep() is false.
  void retain(const std::function<bool(KeyId)>& keep);
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::unordered_map<KeyId, std::string> names_;
};

// Parses one input line "key[\tweight]". Returns false for blank lines.
bool parse_element_line(std::string_view line, std::string_view& key, double& weight);

// Streams elements from `in`, calling sink(element, line_text_key).
// Throws InputError with the line number on malformed input.
void read_elements(std::istream& in, const std::function<void(const Element&, std::string_view)>& sink);

// Reads a whole stream into memory, interning names into `names` if given.
std::vector<Element> read_stream(std::istream& in, KeyNames* names = nullptr);

}  // namespace capstream
