#ifndef COURSEVEC_ERROR_HPP
#define COURSEVEC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace coursevec {

/// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad invocation (missing file, invalid flag value). The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A course id that is not present in the queried model or catalog.
class UnknownCourse : public std::runtime_error {
public:
    explicit UnknownCourse(const std::string& id)
        : std::runtime_error("unknown course: " + id), course_id_(id) {}

    const std::string& course_id() const noexcept { return course_id_; }

private:
    std::string course_id_;
};

}  // namespace coursevec

#endif
