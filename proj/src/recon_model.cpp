#include "shmedge/recon_model.hpp"

namespace shmedge {

Window reconstruct(const ReconModel& model, const Window& w) {
    return std::visit(
        [&](const auto& m) -> Window {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PcaModel>) {
                return pca_reconstruct(m, w);
            } else {
                return ae_reconstruct(m, w);
            }
        },
        model);
}

int model_input_dim(const ReconModel& model) {
    return std::visit([](const auto& m) { return m.input_dim; }, model);
}

int model_latent_dim(const ReconModel& model) {
    return std::visit([](const auto& m) { return m.k; }, model);
}

}  // namespace shmedge
