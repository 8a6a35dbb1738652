#include "crowdseg/errors.hpp"

#include <sstream>

namespace crowdseg::detail {

void check_failed(const char* expr, const char* file, int line) {
    std::ostringstream os;
    os << "internal invariant violated: " << expr << " at " << file << ":" << line;
    throw std::logic_error(os.str());
}

}  // namespace crowdseg::detail
