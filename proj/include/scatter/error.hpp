#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scatter {

enum class ErrorKind {
    ParseError,
    NotClosed,
    NotOriented,
    DegenerateFace,
    LevelTooLarge,
    RemeshFailed,
    AlreadyIntersecting,
    CoincidentPoints,
    ShapeMismatch,
    BlockTooWide,
    FactorizationFailed,
    StepTooSmall,
    NoProgress,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::NotOriented: return "NotOriented";
    case ErrorKind::DegenerateFace: return "DegenerateFace";
    case ErrorKind::LevelTooLarge: return "LevelTooLarge";
    case ErrorKind::RemeshFailed: return "RemeshFailed";
    case ErrorKind::AlreadyIntersecting: return "AlreadyIntersecting";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::BlockTooWide: return "BlockTooWide";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::NoProgress: return "NoProgress";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace scatter
