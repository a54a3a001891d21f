#ifndef CSO_ERROR_H_
#define CSO_ERROR_H_

#include <stdexcept>

namespace cso {

// Malformed or out-of-range user input: corpus records, config files,
// serialized ontologies and models.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lookup of a keyword or topic that does not exist.
class NotFoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace cso

#endif  // CSO_ERROR_H_
