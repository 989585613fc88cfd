#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "metadesign/database.hpp"
#include "metadesign/microstructure.hpp"
#include "metadesign/nn.hpp"
#include "metadesign/stiffness.hpp"

namespace metadesign {

using LatentVector = std::vector<double>;

struct PosteriorParams {
    std::vector<double> mean;
    std::vector<double> stddev;  // exp(0.5 * logvar), strictly positive
};

/// Layer layout of the encoder, decoder and property regressor.
struct Architecture {
    int height = 50;
    int width = 50;
    int latent_dim = 16;
    std::vector<int> encoder_channels{8, 16, 32};  // stride-2 3x3 convolutions
    int decoder_base_channels = 16;                // channels of the coarse grid
    std::vector<int> decoder_channels{8, 8};       // one upsample + conv each
    std::vector<int> regressor_hidden{64, 64};

    /// 8x8 input, J = 2; used for gradient checks.
    static Architecture tiny();
    void validate() const;
    std::string describe() const;
    friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct LossTerms {
    double recon = 0.0;
    double kl = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

/// Single-sample loss: Bernoulli cross-entropy + KL to N(0, I) + Euclidean
/// norm of the property error. `pred`/`label` should be standardized.
LossTerms loss(const Microstructure& m, const DensityField& recon, const PosteriorParams& pp,
               const StiffnessComponents& pred, const StiffnessComponents& label, double reg_weight = 1.0);

LatentVector reparameterize(const PosteriorParams& pp, const std::vector<double>& eps);

class LatentModel {
public:
    explicit LatentModel(Architecture arch = {}, std::uint64_t init_seed = 0);
    LatentModel(LatentModel&&) noexcept;
    LatentModel& operator=(LatentModel&&) noexcept;
    ~LatentModel();

    const Architecture& architecture() const noexcept { return arch_; }
    int latent_dim() const noexcept { return arch_.latent_dim; }

    /// Standardization applied to property labels; predictions are mapped back.
    PropertyScaler label_scaler;

    PosteriorParams encode(const Microstructure& m) const;
    /// Means for many cells at once, one column per cell.
    nn::Matrix encode_means(const std::vector<const Microstructure*>& cells) const;
    DensityField decode(const LatentVector& z) const;
    StiffnessComponents predict_properties(const LatentVector& mean) const;

    /// Mean loss over the batch (one column per sample) with the given noise
    /// draws; gradients are accumulated into the parameter grads when requested.
    LossTerms batch_loss(const nn::Matrix& x, const nn::Matrix& labels_std, const nn::Matrix& eps,
                         double reg_weight, bool compute_gradient);

    std::vector<nn::Param> params();
    std::size_t parameter_count();
    void zero_grad();

private:
    Architecture arch_;
    std::unique_ptr<nn::Sequential> encoder_, decoder_, regressor_;
    mutable std::unique_ptr<std::mutex> mutex_;
};

struct TrainingConfig {
    int batch_size = 32;
    int epochs = 100;
    double learning_rate = 1e-3;
    nn::Optimizer::Kind optimizer = nn::Optimizer::Kind::rmsprop;
    int mc_samples = 1;
    std::uint64_t rng_seed = 0;
    double validation_fraction = 0.1;
    double regression_weight = 1.0;

    void validate() const;
};

struct EpochLoss {
    int epoch = 0;
    LossTerms mean;  // per-sample means over the training split
};

struct TrainingResult {
    LatentModel model;
    std::vector<EpochLoss> history;
    std::vector<std::int64_t> training_ids;
    std::vector<std::int64_t> validation_ids;
};

using EpochCallback = void (*)(const EpochLoss&, void* user);

/// Throws EmptySelection for an empty database and TrainingDivergence on a
/// non-finite loss.
TrainingResult train(const Database& db, const TrainingConfig& cfg, const Architecture& arch = {},
                     EpochCallback callback = nullptr, void* user = nullptr);

/// threshold(decode(mean)) at 0.9, then symmetry and defect repair.
Microstructure reconstruct(const Microstructure& m, const LatentModel& model);
Microstructure decode_cell(const LatentVector& z, const LatentModel& model, double threshold_value = 0.9);

struct ValidationReport {
    double median_pixel_agreement = 0.0;
    double median_property_error = 0.0;  // ||pred - label|| / ||label||, raw units
    std::size_t count = 0;
};
ValidationReport evaluate_model(const LatentModel& model, const Database& db, const std::vector<std::int64_t>& ids);

/// Sets every record's latent vector to the encoder mean and the header's
/// latent_dim to the model's. Throws DimensionError on a grid mismatch.
Database annotate_latents(const Database& db, const LatentModel& model);

void save_weights(LatentModel& model, const std::filesystem::path& path);
LatentModel load_weights(const std::filesystem::path& path);
void write_loss_history(const std::vector<EpochLoss>& history, const std::filesystem::path& path);

}  // namespace metadesign
