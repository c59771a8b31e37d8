#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace livqual {

enum class Label { real, fake };
enum class Split { dev, test };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;
std::optional<Label> parse_label(std::string_view text) noexcept;
std::optional<Split> parse_split(std::string_view text) noexcept;

} // namespace livqual
