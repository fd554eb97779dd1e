#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "shmedge/autoencoder.hpp"
#include "shmedge/detector.hpp"
#include "shmedge/energy_filter.hpp"
#include "shmedge/pca.hpp"

namespace shmedge {

// Everything a node needs to run detection: the reconstructor, the two
// calibrated profiles, and the front-end the reconstructor was trained on.
struct ModelBundle {
    std::variant<PcaModel, AeModel, HpcaState> model;
    EnergyFilterProfile filter;
    DetectorProfile detector;
    SpectralDomain domain = SpectralDomain::time;

    ReconModel reconstructor() const;  // freezes HpcaState if that is what is stored
};

enum class NumericPrecision : std::uint8_t { f64 = 8, f32 = 4 };

// Container layout: magic "SHMM", u16 format version, u8 kind tag, u8
// precision flag, payload, trailing CRC32 of everything before it.
// Round-trips are bit-exact at f64; f32 quantizes weights once on save (the
// loaded file then round-trips exactly).
void save_model(std::ostream& out, const ModelBundle& bundle,
                NumericPrecision precision = NumericPrecision::f64);
void save_model_file(const std::string& path, const ModelBundle& bundle,
                     NumericPrecision precision = NumericPrecision::f64);

ModelBundle load_model(std::istream& in);
ModelBundle load_model_file(const std::string& path);

}  // namespace shmedge
