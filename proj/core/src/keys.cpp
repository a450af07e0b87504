#include "capstream/keys.hpp"

#include <charconv>
#include <cmath>
#include <istream>

namespace capstream {

KeyId KeyNames::resolve(std::string_view text) {
  if (text.size() > 1 && text.front() == '#') {
    KeyId id = 0;
    auto body = text.substr(1);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), id);
    if (ec == std::errc() && ptr == body.data() + body.size()) return id;
  }
  return canonical_key(text);
}

KeyId KeyNames::intern(std::string_view text) {
  KeyId id = resolve(text);
  if (!(text.size() > 1 && text.front() == '#')) names_.try_emplace(id, text);
  return id;
}

void KeyNames::remember(KeyId key, std::string_view name) { names_.try_emplace(key, name); }

std::string KeyNames::name(KeyId key) const {
  auto it = names_.find(key);
  if (it != names_.end()) return it->second;
  return "#" + std::to_string(key);
}

void KeyNames::retain(const std::function<bool(KeyId)>& keep) {
  std::erase_if(names_, [&](const auto& kv) { return !keep(kv.first); });
}

bool parse_element_line(std::string_view line, std::string_view& key, double& weight) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty()) return false;
  auto tab = line.find('\t');
  if (tab == std::string_view::npos) {
    key = line;
    weight = 1.0;
    return true;
  }
  key = line.substr(0, tab);
  auto text = line.substr(tab + 1);
  double w = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), w);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("malformed weight '" + std::string(text) + "'");
  }
  check_weight(w);
  weight = w;
  return true;
}

void read_elements(std::istream& in, const std::function<void(const Element&, std::string_view)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view key;
    double weight = 1.0;
    try {
      if (!parse_element_line(line, key, weight)) continue;
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
    sink(Element{KeyNames::resolve(key), weight}, key);
  }
}

std::vector<Element> read_stream(std::istream& in, KeyNames* names) {
  std::vector<Element> out;
  read_elements(in, [&](const Element& e, std::string_view text) {
    if (names) names->intern(text);
    out.push_back(e);
  });
  return out;
}

}  // namespace capstream
