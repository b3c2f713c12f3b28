#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tws {

/// 1-based line/column. Columns count Unicode scalar values; a tab is one column.
struct SourcePos
{
    int line = 1;
    int col = 1;

    friend bool operator==(const SourcePos&, const SourcePos&) = default;
    friend auto operator<=>(const SourcePos&, const SourcePos&) = default;
};

std::string to_string(SourcePos pos);

/// Raised for any malformed specification file (scanner, grammar, constrainer, generator).
class SpecError : public std::runtime_error
{
  public:
    SpecError(std::string message, SourcePos pos = {})
        : std::runtime_error(to_string(pos) + ": " + message)
        , message_(std::move(message))
        , pos_(pos)
    {
    }

    const std::string& message() const noexcept { return message_; }
    SourcePos position() const noexcept { return pos_; }

  private:
    std::string message_;
    SourcePos pos_;
};

namespace utf8 {

/// Decodes UTF-8 into scalar values. Invalid sequences raise std::invalid_argument
/// naming the byte offset.
std::u32string decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(std::u32string_view text);

} // namespace utf8

} // namespace tws
