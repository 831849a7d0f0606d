#pragma once

#include <stdexcept>
#include <string>

namespace toolgt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (tool JSON, corpus record, config file).
class FormatError : public Error {
public:
    using Error::Error;
};

class DuplicateTool : public FormatError {
public:
    explicit DuplicateTool(const std::string& name)
        : FormatError("duplicate tool name '" + name + "'") {}
};

class UnknownTemplate : public Error {
public:
    explicit UnknownTemplate(const std::string& id) : Error("unknown template '" + id + "'") {}
};

class MissingField : public Error {
public:
    explicit MissingField(const std::string& field) : Error("missing field: " + field) {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace toolgt
