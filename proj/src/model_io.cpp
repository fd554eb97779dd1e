#include "shmedge/model_io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <zlib.h>

#include "shmedge/errors.hpp"

namespace shmedge {

namespace {

constexpr char kMagic[4] = {'S', 'H', 'M', 'M'};
constexpr std::uint16_t kFormatVersion = 1;

enum : std::uint8_t { kKindPca = 0, kKindAe = 1, kKindHpca = 2 };

struct Writer {
    std::string buf;
    NumericPrecision precision;

    void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    // model weights honor the precision flag; scalar metadata stays f64
    void weight(double v) {
        if (precision == NumericPrecision::f32) {
            f32(static_cast<float>(v));
        } else {
            f64(v);
        }
    }
    void vec(const Eigen::VectorXd& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) weight(v(i));
    }
    void mat(const Eigen::MatrixXd& m) {
        u32(static_cast<std::uint32_t>(m.rows()));
        u32(static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) weight(m(r, c));
        }
    }
};

struct Reader {
    const unsigned char* p;
    std::size_t remaining;
    NumericPrecision precision = NumericPrecision::f64;

    void need(std::size_t n) const {
        if (n > remaining) throw FormatError("model file truncated inside payload");
    }
    std::uint8_t u8() {
        need(1);
        const std::uint8_t v = p[0];
        p += 1;
        remaining -= 1;
        return v;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(p[i]) << (8 * i);
        p += 2;
        remaining -= 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        remaining -= 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        p += 8;
        remaining -= 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    double weight() {
        if (precision == NumericPrecision::f32) {
            const std::uint32_t bits = u32();
            float v;
            std::memcpy(&v, &bits, 4);
            return static_cast<double>(v);
        }
        return f64();
    }
    Eigen::VectorXd vec() {
        const std::uint32_t n = u32();
        need(static_cast<std::size_t>(n) *
             (precision == NumericPrecision::f32 ? 4 : 8));
        Eigen::VectorXd v(n);
        for (std::uint32_t i = 0; i < n; ++i) v(i) = weight();
        return v;
    }
    Eigen::MatrixXd mat() {
        const std::uint32_t rows = u32();
        const std::uint32_t cols = u32();
        const std::size_t count = static_cast<std::size_t>(rows) * cols;
        need(count * (precision == NumericPrecision::f32 ? 4 : 8));
        Eigen::MatrixXd m(rows, cols);
        for (std::uint32_t c = 0; c < cols; ++c) {
            for (std::uint32_t r = 0; r < rows; ++r) m(r, c) = weight();
        }
        return m;
    }
};

void write_filter(Writer& w, const EnergyFilterProfile& f) {
    w.f64(f.threshold);
    w.f64(f.qos_rsnr_db);
    w.f64(f.step);
    w.u8(static_cast<std::uint8_t>(f.step_mode));
    w.f64(f.retained_fraction);
}

EnergyFilterProfile read_filter(Reader& r) {
    EnergyFilterProfile f;
    f.threshold = r.f64();
    f.qos_rsnr_db = r.f64();
    f.step = r.f64();
    f.step_mode = static_cast<ThresholdStepMode>(r.u8());
    f.retained_fraction = r.f64();
    return f;
}

void write_detector(Writer& w, const DetectorProfile& d) {
    w.f64(d.mse_threshold);
    w.f64(d.mu);
    w.f64(d.sigma);
    w.u32(static_cast<std::uint32_t>(d.output_dim_minutes));
    w.f64(d.input_dim_s);
    w.u32(d.calibration_hash);
}

DetectorProfile read_detector(Reader& r) {
    DetectorProfile d;
    d.mse_threshold = r.f64();
    d.mu = r.f64();
    d.sigma = r.f64();
    d.output_dim_minutes = static_cast<int>(r.u32());
    d.input_dim_s = r.f64();
    d.calibration_hash = r.u32();
    return d;
}

}  // namespace

ReconModel ModelBundle::reconstructor() const {
    if (const auto* pca = std::get_if<PcaModel>(&model)) return *pca;
    if (const auto* ae = std::get_if<AeModel>(&model)) return *ae;
    return hpca_to_pca(std::get<HpcaState>(model));
}

void save_model(std::ostream& out, const ModelBundle& bundle, NumericPrecision precision) {
    Writer w;
    w.precision = precision;
    w.u16(kFormatVersion);

    std::uint8_t kind = kKindPca;
    if (std::holds_alternative<AeModel>(bundle.model)) kind = kKindAe;
    if (std::holds_alternative<HpcaState>(bundle.model)) kind = kKindHpca;
    w.u8(kind);
    w.u8(static_cast<std::uint8_t>(precision));
    w.u8(static_cast<std::uint8_t>(bundle.domain));

    switch (kind) {
        case kKindPca: {
            const auto& m = std::get<PcaModel>(bundle.model);
            w.u32(static_cast<std::uint32_t>(m.input_dim));
            w.u32(static_cast<std::uint32_t>(m.k));
            w.vec(m.mean);
            w.mat(m.components);
            w.vec(m.eigenvalues);
            break;
        }
        case kKindAe: {
            const auto& m = std::get<AeModel>(bundle.model);
            w.u32(static_cast<std::uint32_t>(m.input_dim));
            w.u32(static_cast<std::uint32_t>(m.k));
            w.u8(static_cast<std::uint8_t>(m.hidden_activation));
            w.u8(static_cast<std::uint8_t>(m.output_activation));
            w.mat(m.enc_weights);
            w.vec(m.enc_bias);
            w.mat(m.dec_weights);
            w.vec(m.dec_bias);
            w.u32(static_cast<std::uint32_t>(m.train_meta.epochs));
            w.f64(m.train_meta.learning_rate);
            w.f64(m.train_meta.final_loss);
            w.u32(static_cast<std::uint32_t>(m.train_meta.loss_trajectory.size()));
            for (double v : m.train_meta.loss_trajectory) w.f64(v);
            break;
        }
        case kKindHpca: {
            const auto& m = std::get<HpcaState>(bundle.model);
            w.u32(static_cast<std::uint32_t>(m.input_dim));
            w.u32(static_cast<std::uint32_t>(m.k));
            w.mat(m.components_estimate);
            w.vec(m.scale);
            w.vec(m.running_mean);
            w.u64(m.samples_seen);
            w.u64(m.blocks_seen);
            w.f64(m.history_weight);
            w.u64(m.rng_seed);
            w.u8(m.zero_variance ? 1 : 0);
            break;
        }
        default: break;
    }

    write_filter(w, bundle.filter);
    write_detector(w, bundle.detector);

    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(w.buf.data()), static_cast<uInt>(w.buf.size())));

    out.write(kMagic, 4);
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    char crc_bytes[4];
    for (int i = 0; i < 4; ++i) crc_bytes[i] = static_cast<char>((crc >> (8 * i)) & 0xff);
    out.write(crc_bytes, 4);
    if (!out) throw FormatError("failed writing model stream");
}

void save_model_file(const std::string& path, const ModelBundle& bundle,
                     NumericPrecision precision) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    save_model(out, bundle, precision);
}

ModelBundle load_model(std::istream& in) {
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() < 4 + 2 + 1 + 1 + 1 + 4) throw FormatError("model file too short");
    if (std::memcmp(raw.data(), kMagic, 4) != 0) throw FormatError("bad model magic");

    const std::size_t body_len = raw.size() - 4 - 4;
    const auto* body = reinterpret_cast<const unsigned char*>(raw.data()) + 4;
    std::uint32_t stored_crc = 0;
    for (int i = 0; i < 4; ++i) {
        stored_crc |= static_cast<std::uint32_t>(
                          static_cast<unsigned char>(raw[raw.size() - 4 + static_cast<std::size_t>(i)]))
                      << (8 * i);
    }
    const auto actual_crc =
        static_cast<std::uint32_t>(crc32(0L, body, static_cast<uInt>(body_len)));
    if (stored_crc != actual_crc) throw FormatError("model checksum mismatch");

    Reader r{body, body_len};
    const std::uint16_t version = r.u16();
    if (version != kFormatVersion) {
        throw FormatError("unsupported model format version " + std::to_string(version));
    }
    const std::uint8_t kind = r.u8();
    const std::uint8_t precision = r.u8();
    if (precision != 4 && precision != 8) throw FormatError("bad precision flag");
    r.precision = static_cast<NumericPrecision>(precision);
    const std::uint8_t domain = r.u8();
    if (domain > 2) throw FormatError("bad domain tag");

    ModelBundle bundle;
    bundle.domain = static_cast<SpectralDomain>(domain);

    switch (kind) {
        case kKindPca: {
            PcaModel m;
            m.input_dim = static_cast<int>(r.u32());
            m.k = static_cast<int>(r.u32());
            m.mean = r.vec();
            m.components = r.mat();
            m.eigenvalues = r.vec();
            if (m.mean.size() != m.input_dim || m.components.rows() != m.input_dim ||
                m.components.cols() != m.k) {
                throw FormatError("inconsistent dimensions in stored model");
            }
            bundle.model = std::move(m);
            break;
        }
        case kKindAe: {
            AeModel m;
            m.input_dim = static_cast<int>(r.u32());
            m.k = static_cast<int>(r.u32());
            m.hidden_activation = static_cast<Activation>(r.u8());
            m.output_activation = static_cast<Activation>(r.u8());
            m.enc_weights = r.mat();
            m.enc_bias = r.vec();
            m.dec_weights = r.mat();
            m.dec_bias = r.vec();
            m.train_meta.epochs = static_cast<int>(r.u32());
            m.train_meta.learning_rate = r.f64();
            m.train_meta.final_loss = r.f64();
            const std::uint32_t traj = r.u32();
            m.train_meta.loss_trajectory.resize(traj);
            for (std::uint32_t i = 0; i < traj; ++i) m.train_meta.loss_trajectory[i] = r.f64();
            if (m.enc_weights.rows() != m.k || m.enc_weights.cols() != m.input_dim ||
                m.dec_weights.rows() != m.input_dim || m.dec_weights.cols() != m.k) {
                throw FormatError("inconsistent dimensions in stored model");
            }
            bundle.model = std::move(m);
            break;
        }
        case kKindHpca: {
            HpcaState m;
            m.input_dim = static_cast<int>(r.u32());
            m.k = static_cast<int>(r.u32());
            m.components_estimate = r.mat();
            m.scale = r.vec();
            m.running_mean = r.vec();
            m.samples_seen = r.u64();
            m.blocks_seen = r.u64();
            m.history_weight = r.f64();
            m.rng_seed = r.u64();
            m.zero_variance = r.u8() != 0;
            if (m.components_estimate.rows() != m.input_dim ||
                m.components_estimate.cols() != m.k || m.scale.size() != m.k) {
                throw FormatError("inconsistent dimensions in stored model");
            }
            bundle.model = std::move(m);
            break;
        }
        default: throw FormatError("unknown model kind tag " + std::to_string(kind));
    }

    bundle.filter = read_filter(r);
    bundle.detector = read_detector(r);
    if (r.remaining != 0) throw FormatError("trailing bytes after model payload");
    return bundle;
}

ModelBundle load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    return load_model(in);
}

}  // namespace shmedge
