#pragma once

#include <stdexcept>
#include <string>

namespace regenhd {

// Error categories map to CLI exit codes: config=1, data=2, invariant=3.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class invariant_error : public std::runtime_error {
public:
    explicit invariant_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace regenhd
