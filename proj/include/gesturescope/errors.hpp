#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace gesturescope {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define GESTURESCOPE_ERROR(Name)                                        \
    class Name : public Error {                                         \
    public:                                                             \
        using Error::Error;                                             \
        const char* kind() const noexcept override { return #Name; }    \
    }

GESTURESCOPE_ERROR(SchemaError);
GESTURESCOPE_ERROR(ConfigError);
GESTURESCOPE_ERROR(NormalizationError);
GESTURESCOPE_ERROR(TypingError);
GESTURESCOPE_ERROR(EmptySegmentError);
GESTURESCOPE_ERROR(DegenerateFrameError);
GESTURESCOPE_ERROR(TooFewItemsError);
GESTURESCOPE_ERROR(GlyphError);
GESTURESCOPE_ERROR(StorageError);
GESTURESCOPE_ERROR(NotFound);
GESTURESCOPE_ERROR(Conflict);
GESTURESCOPE_ERROR(ValidationError);

#undef GESTURESCOPE_ERROR

// Malformed input. Carries the offending frame index when one is known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::optional<std::size_t> frame = std::nullopt)
        : Error(what), frame_index_(frame) {}
    const char* kind() const noexcept override { return "ParseError"; }
    std::optional<std::size_t> frame_index() const noexcept { return frame_index_; }

private:
    std::optional<std::size_t> frame_index_;
};

}  // namespace gesturescope
