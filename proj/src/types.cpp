#include "shmedge/types.hpp"

#include "shmedge/errors.hpp"

namespace shmedge {

const char* to_string(SpectralDomain d) {
    switch (d) {
        case SpectralDomain::time: return "time";
        case SpectralDomain::fft: return "fft";
        case SpectralDomain::dwt: return "dwt";
    }
    return "time";
}

SpectralDomain spectral_domain_from_string(const std::string& s) {
    if (s == "time" || s == "raw") return SpectralDomain::time;
    if (s == "fft") return SpectralDomain::fft;
    if (s == "dwt") return SpectralDomain::dwt;
    throw ParameterError("unknown domain '" + s + "'");
}

}  // namespace shmedge
