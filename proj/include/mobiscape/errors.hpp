#ifndef MOBISCAPE_ERRORS_HPP
#define MOBISCAPE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mobiscape {

// Base of every error the toolkit throws. The CLI maps these to exit code 1
// with a single-line message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MOBISCAPE_DEFINE_ERROR(Name)                                      \
    class Name : public ::mobiscape::Error {                              \
    public:                                                               \
        explicit Name(const std::string& msg) : ::mobiscape::Error(msg) {} \
    }

}  // namespace mobiscape

#endif
