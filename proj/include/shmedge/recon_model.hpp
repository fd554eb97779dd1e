#pragma once

#include <variant>

#include "shmedge/autoencoder.hpp"
#include "shmedge/pca.hpp"

namespace shmedge {

// A deployable reconstructor. Streaming-PCA states are frozen into PcaModel
// via hpca_to_pca before use here.
using ReconModel = std::variant<PcaModel, AeModel>;

Window reconstruct(const ReconModel& model, const Window& w);

int model_input_dim(const ReconModel& model);
int model_latent_dim(const ReconModel& model);

}  // namespace shmedge
