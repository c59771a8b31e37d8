#include "livqual/labels.hpp"

namespace livqual {

std::string_view to_string(Label label) noexcept {
  return label == Label::real ? "real" : "fake";
}

std::string_view to_string(Split split) noexcept {
  return split == Split::dev ? "dev" : "test";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text == "real") return Label::real;
  if (text == "fake") return Label::fake;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view text) noexcept {
  if (text == "dev") return Split::dev;
  if (text == "test") return Split::test;
  return std::nullopt;
}

} // namespace livqual
