#include "glac/rng.hpp"

#include <bit>
#include <sstream>

#include "glac/error.hpp"

namespace glac {

std::string Rng::state() const {
    std::ostringstream os;
    os << eng_ << " " << (have_spare_ ? 1 : 0) << " "
       << std::bit_cast<uint64_t>(spare_);
    return os.str();
}

void Rng::set_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    int flag = 0;
    uint64_t bits = 0;
    is >> flag >> bits;
    if (is.fail()) throw ParseError("rng state string is malformed");
    have_spare_ = flag != 0;
    spare_ = std::bit_cast<double>(bits);
}

} // namespace glac
