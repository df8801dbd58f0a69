#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faae/data.hpp"
#include "faae/model.hpp"

namespace faae {

constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything a later evaluation needs to score new data exactly as the
/// training run would have: model configuration and parameters, the frozen
/// preprocessing (feature normalization and ICV decile cuts), and which
/// subjects were trained on.
struct Checkpoint {
    ModelConfig config;
    Vec encoder_params;
    Vec decoder_params;
    Vec discriminator_params;
    Normalization normalization;
    Vec icv_cuts;
    std::vector<std::string> train_subject_ids;
    std::vector<std::string> region_names;

    static Checkpoint from_model(const FaaeModel& model, const Normalization& normalization,
                                 const CovariateEncoder& encoder,
                                 std::vector<std::string> train_subject_ids,
                                 std::vector<std::string> region_names);

    /// Rebuilds the model with the stored parameters (fresh optimizer state).
    FaaeModel restore() const;
};

/// Binary format: magic "FAAECKPT", u32 version, u64 header length, JSON
/// header (config, layer shapes, preprocessing, subject ids), then the three
/// parameter groups as little-endian f64 in stack order. Fully
/// self-describing; byte-identical for identical contents.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace faae
