#pragma once

#include <stdexcept>
#include <string>

namespace asnet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidBoxError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class SingularSystemError : public Error { public: using Error::Error; };
class AlignmentError : public Error { public: using Error::Error; };
class InvalidWeightsError : public Error { public: using Error::Error; };
class SyncError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

/// Malformed input file; the message carries file and line.
class ParseError : public Error {
public:
    ParseError(const std::string& file, int line, const std::string& what)
        : Error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
          file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }

private:
    std::string file_;
    int line_;
};

}  // namespace asnet
