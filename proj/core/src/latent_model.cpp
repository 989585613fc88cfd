#include "metadesign/latent_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "metadesign/error.hpp"

namespace metadesign {

using nn::Matrix;

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Keeps exp(logvar) finite for arbitrary encoder outputs.
constexpr double kLogvarLimit = 30.0;

std::vector<int> halving_sizes(int n, std::size_t steps) {
    std::vector<int> s{n};
    for (std::size_t i = 0; i < steps; ++i) s.push_back((s.back() + 1) / 2);
    return s;
}

Matrix cell_column(const Microstructure& m) {
    Matrix x(static_cast<Eigen::Index>(m.size()), 1);
    for (std::size_t i = 0; i < m.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = m.cells()[i];
    return x;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Architecture Architecture::tiny() {
    Architecture a;
    a.height = 8;
    a.width = 8;
    a.latent_dim = 2;
    a.encoder_channels = {1};
    a.decoder_base_channels = 1;
    a.decoder_channels = {1};
    a.regressor_hidden = {3};
    return a;
}

void Architecture::validate() const {
    if (height < 2 || width < 2) throw DimensionError("architecture input must be at least 2x2");
    if (latent_dim < 1) throw DimensionError("latent dimension must be positive");
    if (encoder_channels.empty()) throw DimensionError("encoder needs at least one convolution");
    if (decoder_base_channels < 1) throw DimensionError("decoder base channels must be positive");
    for (int c : encoder_channels)
        if (c < 1) throw DimensionError("channel counts must be positive");
    for (int c : decoder_channels)
        if (c < 1) throw DimensionError("channel counts must be positive");
    for (int c : regressor_hidden)
        if (c < 1) throw DimensionError("regressor widths must be positive");
}

std::string Architecture::describe() const {
    std::ostringstream os;
    auto list = [&os](const std::vector<int>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    };
    os << "input=" << height << "x" << width << " J=" << latent_dim << " encoder=";
    list(encoder_channels);
    os << " decoder_base=" << decoder_base_channels << " decoder=";
    list(decoder_channels);
    os << " regressor=";
    list(regressor_hidden);
    return os.str();
}

LossTerms loss(const Microstructure& m, const DensityField& recon, const PosteriorParams& pp,
               const StiffnessComponents& pred, const StiffnessComponents& label, double reg_weight) {
    if (recon.values.size() != m.size() || recon.height != m.height() || recon.width != m.width())
        throw DimensionError("reconstruction shape does not match the microstructure");
    if (pp.mean.size() != pp.stddev.size()) throw DimensionError("posterior mean/std length mismatch");
    LossTerms t;
    constexpr double tiny = 1e-12;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double p = std::clamp(recon.values[i], tiny, 1.0 - tiny);
        t.recon -= m.cells()[i] ? std::log(p) : std::log(1.0 - p);
    }
    for (std::size_t j = 0; j < pp.mean.size(); ++j) {
        const double s = pp.stddev[j], mu = pp.mean[j];
        if (!(s > 0.0)) throw DomainError("posterior standard deviation must be positive");
        t.kl += -0.5 * (1.0 + std::log(s * s) - s * s - mu * mu);
    }
    const auto a = pred.to_array(), b = label.to_array();
    t.reg = reg_weight * std::sqrt(squared_distance(a, b));
    t.total = t.recon + t.kl + t.reg;
    if (!std::isfinite(t.total)) throw DomainError("non-finite loss inputs");
    return t;
}

LatentVector reparameterize(const PosteriorParams& pp, const std::vector<double>& eps) {
    if (pp.mean.size() != pp.stddev.size() || eps.size() != pp.mean.size())
        throw DimensionError("reparameterize: length mismatch");
    LatentVector z(eps.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = pp.mean[j] + pp.stddev[j] * eps[j];
    return z;
}

LatentModel::LatentModel(Architecture arch, std::uint64_t init_seed)
    : arch_(std::move(arch)), encoder_(std::make_unique<nn::Sequential>()),
      decoder_(std::make_unique<nn::Sequential>()), regressor_(std::make_unique<nn::Sequential>()),
      mutex_(std::make_unique<std::mutex>()) {
    arch_.validate();
    using nn::ActivationKind;
    const int j = arch_.latent_dim;

    nn::Shape s{1, arch_.height, arch_.width};
    for (int c : arch_.encoder_channels) {
        auto conv = std::make_unique<nn::Conv2d>(s, c, 3, 2, 1);
        s = conv->output_shape();
        encoder_->add(std::move(conv));
        encoder_->add(std::make_unique<nn::Activation>(s, ActivationKind::relu));
    }
    encoder_->add(std::make_unique<nn::Dense>(s.size(), 2 * j));

    const auto hs = halving_sizes(arch_.height, arch_.decoder_channels.size());
    const auto ws = halving_sizes(arch_.width, arch_.decoder_channels.size());
    nn::Shape d{arch_.decoder_base_channels, hs.back(), ws.back()};
    decoder_->add(std::make_unique<nn::Dense>(j, d.size()));
    decoder_->add(std::make_unique<nn::Activation>(d, ActivationKind::relu));
    for (std::size_t i = 0; i < arch_.decoder_channels.size(); ++i) {
        const std::size_t level = arch_.decoder_channels.size() - 1 - i;
        auto up = std::make_unique<nn::Upsample>(d, hs[level], ws[level]);
        d = up->output_shape();
        decoder_->add(std::move(up));
        auto conv = std::make_unique<nn::Conv2d>(d, arch_.decoder_channels[i], 3, 1, 1);
        d = conv->output_shape();
        decoder_->add(std::move(conv));
        decoder_->add(std::make_unique<nn::Activation>(d, ActivationKind::relu));
    }
    decoder_->add(std::make_unique<nn::Conv2d>(d, 1, 3, 1, 1));  // logits

    int width = j;
    for (int h : arch_.regressor_hidden) {
        regressor_->add(std::make_unique<nn::Dense>(width, h));
        regressor_->add(std::make_unique<nn::Activation>(nn::Shape{h, 1, 1}, ActivationKind::tanh));
        width = h;
    }
    regressor_->add(std::make_unique<nn::Dense>(width, 4));

    std::mt19937_64 rng(init_seed);
    encoder_->init(rng);
    decoder_->init(rng);
    regressor_->init(rng);
}

LatentModel::LatentModel(LatentModel&&) noexcept = default;
LatentModel& LatentModel::operator=(LatentModel&&) noexcept = default;
LatentModel::~LatentModel() = default;

std::vector<nn::Param> LatentModel::params() {
    std::vector<nn::Param> out;
    for (auto [prefix, net] : {std::pair{"encoder", encoder_.get()}, std::pair{"decoder", decoder_.get()},
                               std::pair{"regressor", regressor_.get()}})
        for (auto p : net->params()) {
            p.name = std::string(prefix) + "." + p.name;
            out.push_back(p);
        }
    return out;
}

std::size_t LatentModel::parameter_count() {
    std::size_t n = 0;
    for (const auto& p : params()) n += static_cast<std::size_t>(p.value->size());
    return n;
}

void LatentModel::zero_grad() {
    encoder_->zero_grad();
    decoder_->zero_grad();
    regressor_->zero_grad();
}

PosteriorParams LatentModel::encode(const Microstructure& m) const {
    if (m.height() != arch_.height || m.width() != arch_.width)
        throw DimensionError("microstructure shape does not match the model input");
    std::lock_guard lock(*mutex_);
    const Matrix out = encoder_->forward(cell_column(m));
    const int j = arch_.latent_dim;
    PosteriorParams pp;
    pp.mean.resize(static_cast<std::size_t>(j));
    pp.stddev.resize(static_cast<std::size_t>(j));
    for (int i = 0; i < j; ++i) {
        pp.mean[static_cast<std::size_t>(i)] = out(i, 0);
        pp.stddev[static_cast<std::size_t>(i)] = std::exp(0.5 * std::clamp(out(j + i, 0), -kLogvarLimit, kLogvarLimit));
    }
    return pp;
}

Matrix LatentModel::encode_means(const std::vector<const Microstructure*>& cells) const {
    const int j = arch_.latent_dim;
    const auto hw = static_cast<Eigen::Index>(arch_.height) * arch_.width;
    Matrix means(j, static_cast<Eigen::Index>(cells.size()));
    constexpr std::size_t chunk = 64;
    std::lock_guard lock(*mutex_);
    for (std::size_t start = 0; start < cells.size(); start += chunk) {
        const std::size_t n = std::min(chunk, cells.size() - start);
        Matrix x(hw, static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) {
            const Microstructure& m = *cells[start + k];
            if (m.height() != arch_.height || m.width() != arch_.width)
                throw DimensionError("microstructure shape does not match the model input");
            for (Eigen::Index i = 0; i < hw; ++i) x(i, static_cast<Eigen::Index>(k)) = m.cells()[static_cast<std::size_t>(i)];
        }
        const Matrix out = encoder_->forward(x);
        means.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) = out.topRows(j);
    }
    return means;
}

DensityField LatentModel::decode(const LatentVector& z) const {
    if (static_cast<int>(z.size()) != arch_.latent_dim) throw DimensionError("latent vector length mismatch");
    Matrix zin(arch_.latent_dim, 1);
    for (int i = 0; i < arch_.latent_dim; ++i) zin(i, 0) = z[static_cast<std::size_t>(i)];
    std::lock_guard lock(*mutex_);
    const Matrix logits = decoder_->forward(zin);
    DensityField f{arch_.height, arch_.width, std::vector<double>(static_cast<std::size_t>(logits.rows()))};
    for (Eigen::Index i = 0; i < logits.rows(); ++i) f.values[static_cast<std::size_t>(i)] = sigmoid(logits(i, 0));
    return f;
}

StiffnessComponents LatentModel::predict_properties(const LatentVector& mean) const {
    if (static_cast<int>(mean.size()) != arch_.latent_dim) throw DimensionError("latent vector length mismatch");
    Matrix zin(arch_.latent_dim, 1);
    for (int i = 0; i < arch_.latent_dim; ++i) zin(i, 0) = mean[static_cast<std::size_t>(i)];
    std::lock_guard lock(*mutex_);
    const Matrix y = regressor_->forward(zin);
    const std::array<double, 4> s{y(0, 0), y(1, 0), y(2, 0), y(3, 0)};
    return label_scaler.destandardize(s);
}

LossTerms LatentModel::batch_loss(const Matrix& x, const Matrix& labels_std, const Matrix& eps, double reg_weight,
                                  bool compute_gradient) {
    const int j = arch_.latent_dim;
    const Eigen::Index b = x.cols();
    if (x.rows() != static_cast<Eigen::Index>(arch_.height) * arch_.width || labels_std.rows() != 4 ||
        labels_std.cols() != b || eps.rows() != j || eps.cols() != b || b == 0)
        throw DimensionError("batch_loss: inconsistent batch shapes");
    std::lock_guard lock(*mutex_);

    const Matrix enc = encoder_->forward(x);
    const Matrix mu = enc.topRows(j);
    const Matrix logvar = enc.bottomRows(j).cwiseMax(-kLogvarLimit).cwiseMin(kLogvarLimit);
    const Matrix sigma = (0.5 * logvar.array()).exp().matrix();
    const Matrix z = mu + sigma.cwiseProduct(eps);
    const Matrix logits = decoder_->forward(z);
    const Matrix pred = regressor_->forward(mu);

    LossTerms t;
    Matrix dlogits(logits.rows(), b);
    Matrix dpred = Matrix::Zero(4, b);
    const double inv_b = 1.0 / static_cast<double>(b);
    for (Eigen::Index s = 0; s < b; ++s) {
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            const double l = logits(i, s), xi = x(i, s);
            t.recon += softplus(l) - xi * l;
            dlogits(i, s) = (sigmoid(l) - xi) * inv_b;
        }
        for (int k = 0; k < j; ++k)
            t.kl += -0.5 * (1.0 + logvar(k, s) - std::exp(logvar(k, s)) - mu(k, s) * mu(k, s));
        const Eigen::Vector4d diff = pred.col(s) - labels_std.col(s);
        const double norm = diff.norm();
        t.reg += reg_weight * norm;
        if (norm > 0.0) dpred.col(s) = reg_weight * diff / norm * inv_b;
    }
    t.recon *= inv_b;
    t.kl *= inv_b;
    t.reg *= inv_b;
    t.total = t.recon + t.kl + t.reg;
    if (!compute_gradient) return t;

    const Matrix dz = decoder_->backward(dlogits);
    const Matrix dmu_reg = regressor_->backward(dpred);
    Matrix denc(2 * j, b);
    denc.topRows(j) = dz + dmu_reg + mu * inv_b;
    const Matrix raw_logvar = enc.bottomRows(j);
    for (Eigen::Index s = 0; s < b; ++s)
        for (int k = 0; k < j; ++k) {
            const bool inside = raw_logvar(k, s) > -kLogvarLimit && raw_logvar(k, s) < kLogvarLimit;
            denc(j + k, s) = inside ? dz(k, s) * eps(k, s) * 0.5 * sigma(k, s) +
                                          0.5 * (std::exp(logvar(k, s)) - 1.0) * inv_b
                                    : 0.0;
        }
    encoder_->backward(denc);
    return t;
}

void TrainingConfig::validate() const {
    if (batch_size < 1) throw DomainError("batch_size must be at least 1");
    if (epochs < 1) throw DomainError("epochs must be at least 1");
    if (mc_samples < 1) throw DomainError("mc_samples must be at least 1");
    if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw DomainError("validation_fraction must lie in [0, 1)");
    if (!(regression_weight >= 0.0)) throw DomainError("regression_weight must be non-negative");
}

TrainingResult train(const Database& db, const TrainingConfig& cfg, const Architecture& arch, EpochCallback callback,
                     void* user) {
    cfg.validate();
    if (db.empty()) throw EmptySelection("cannot train on an empty database");
    if (arch.height != db.header.height || arch.width != db.header.width)
        throw DimensionError("architecture input does not match the database grid");

    std::mt19937_64 rng(cfg.rng_seed);
    const std::size_t n = db.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    std::size_t n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(n)));
    if (n_val >= n) n_val = n - 1;
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());

    TrainingResult result{LatentModel(arch, rng()), {}, {}, {}};
    for (auto i : tr) result.training_ids.push_back(db.records()[i].id);
    for (auto i : val) result.validation_ids.push_back(db.records()[i].id);

    std::vector<StiffnessComponents> labels;
    for (auto i : tr) labels.push_back(db.records()[i].properties);
    LatentModel& model = result.model;
    model.label_scaler = PropertyScaler::fit(labels);

    const auto hw = static_cast<Eigen::Index>(arch.height) * arch.width;
    Matrix x_all(hw, static_cast<Eigen::Index>(tr.size()));
    Matrix y_all(4, static_cast<Eigen::Index>(tr.size()));
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& r = db.records()[tr[k]];
        for (Eigen::Index i = 0; i < hw; ++i) x_all(i, static_cast<Eigen::Index>(k)) = r.cell.cells()[static_cast<std::size_t>(i)];
        const auto s = model.label_scaler.standardize(r.properties);
        for (int c = 0; c < 4; ++c) y_all(c, static_cast<Eigen::Index>(k)) = s[static_cast<std::size_t>(c)];
    }

    nn::Optimizer opt(cfg.optimizer, cfg.learning_rate);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::Index> perm(tr.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
    const int j = arch.latent_dim;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
        LossTerms sum;
        for (std::size_t start = 0; start < perm.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bsz = std::min(static_cast<std::size_t>(cfg.batch_size), perm.size() - start);
            Matrix xb(hw, static_cast<Eigen::Index>(bsz)), yb(4, static_cast<Eigen::Index>(bsz));
            for (std::size_t k = 0; k < bsz; ++k) {
                xb.col(static_cast<Eigen::Index>(k)) = x_all.col(perm[start + k]);
                yb.col(static_cast<Eigen::Index>(k)) = y_all.col(perm[start + k]);
            }
            model.zero_grad();
            LossTerms batch;
            for (int l = 0; l < cfg.mc_samples; ++l) {
                Matrix eps(j, static_cast<Eigen::Index>(bsz));
                for (Eigen::Index c = 0; c < eps.cols(); ++c)
                    for (Eigen::Index r = 0; r < eps.rows(); ++r) eps(r, c) = normal(rng);
                const LossTerms t = model.batch_loss(xb, yb, eps, cfg.regression_weight, true);
                batch.recon += t.recon / cfg.mc_samples;
                batch.kl += t.kl / cfg.mc_samples;
                batch.reg += t.reg / cfg.mc_samples;
                batch.total += t.total / cfg.mc_samples;
            }
            if (!std::isfinite(batch.total))
                throw TrainingDivergence("non-finite loss at epoch " + std::to_string(epoch));
            auto params = model.params();
            if (cfg.mc_samples > 1)
                for (auto& p : params) *p.grad /= static_cast<double>(cfg.mc_samples);
            opt.step(params);
            const double w = static_cast<double>(bsz);
            sum.recon += batch.recon * w;
            sum.kl += batch.kl * w;
            sum.reg += batch.reg * w;
            sum.total += batch.total * w;
        }
        const double inv = 1.0 / static_cast<double>(perm.size());
        EpochLoss e{epoch, {sum.recon * inv, sum.kl * inv, sum.reg * inv, sum.total * inv}};
        result.history.push_back(e);
        if (callback) callback(e, user);
    }
    return result;
}

Microstructure decode_cell(const LatentVector& z, const LatentModel& model, double threshold_value) {
    const Microstructure raw = threshold(model.decode(z), threshold_value);
    return repair_defects(enforce_orthotropic_symmetry(raw));
}

Microstructure reconstruct(const Microstructure& m, const LatentModel& model) {
    return decode_cell(model.encode(m).mean, model);
}

Database annotate_latents(const Database& db, const LatentModel& model) {
    const auto& arch = model.architecture();
    if (db.header.height != arch.height || db.header.width != arch.width)
        throw DimensionError("database grid does not match the model input");
    Database out = db;
    out.header.latent_dim = arch.latent_dim;
    std::vector<const Microstructure*> cells;
    cells.reserve(db.size());
    for (const auto& r : db.records()) cells.push_back(&r.cell);
    const Matrix means = model.encode_means(cells);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& z = out.records()[i].latent.emplace(static_cast<std::size_t>(arch.latent_dim));
        for (int k = 0; k < arch.latent_dim; ++k) z[static_cast<std::size_t>(k)] = means(k, static_cast<Eigen::Index>(i));
    }
    return out;
}

ValidationReport evaluate_model(const LatentModel& model, const Database& db, const std::vector<std::int64_t>& ids) {
    std::vector<double> agreement, error;
    for (auto id : ids) {
        const auto& r = db.at_id(id);
        const PosteriorParams pp = model.encode(r.cell);
        const Microstructure rec = decode_cell(pp.mean, model);
        std::size_t same = 0;
        for (std::size_t i = 0; i < rec.size(); ++i) same += rec.cells()[i] == r.cell.cells()[i] ? 1 : 0;
        agreement.push_back(static_cast<double>(same) / static_cast<double>(rec.size()));
        const auto pred = model.predict_properties(pp.mean).to_array();
        const auto label = r.properties.to_array();
        const double denom = std::sqrt(squared_distance(label, {0, 0, 0, 0}));
        error.push_back(std::sqrt(squared_distance(pred, label)) / std::max(denom, 1e-300));
    }
    return {median(agreement), median(error), ids.size()};
}

namespace {

constexpr const char* kMagic = "METAVAE1";

void write_doubles(std::ostream& os, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        double v = m.data()[i];
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char buf[8];
        std::memcpy(buf, &bits, 8);
        os.write(buf, 8);
    }
}

void read_doubles(std::istream& is, Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        char buf[8];
        if (!is.read(buf, 8)) throw FormatError("weights file truncated", 0);
        std::uint64_t bits;
        std::memcpy(&bits, buf, 8);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        m.data()[i] = v;
    }
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += " " + std::to_string(x);
    return s;
}

std::vector<int> ints(std::istringstream& is) {
    std::vector<int> v;
    int x;
    while (is >> x) v.push_back(x);
    return v;
}

}  // namespace

void save_weights(LatentModel& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open weights file for writing: " + path.string());
    const Architecture& a = model.architecture();
    char buf[64];
    os << kMagic << "\n";
    os << "version 1\n";
    os << "latent " << a.latent_dim << "\n";
    os << "input " << a.height << " " << a.width << "\n";
    os << "encoder" << join(a.encoder_channels) << "\n";
    os << "decoder_base " << a.decoder_base_channels << "\n";
    os << "decoder" << join(a.decoder_channels) << "\n";
    os << "regressor" << join(a.regressor_hidden) << "\n";
    os << "label_mean";
    for (double v : model.label_scaler.mean) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        os << buf;
    }
    os << "\nlabel_scale";
    for (double v : model.label_scaler.scale) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        os << buf;
    }
    auto params = model.params();
    os << "\nlayers " << params.size() << "\n";
    for (const auto& p : params) os << p.name << " " << p.value->rows() << " " << p.value->cols() << "\n";
    os << "data\n";
    for (const auto& p : params) write_doubles(os, *p.value);
    if (!os) throw Error("failed writing weights file: " + path.string());
}

LatentModel load_weights(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open weights file: " + path.string());
    std::string line;
    int lineno = 0;
    auto next = [&]() -> std::istringstream {
        if (!std::getline(is, line)) throw FormatError("weights header truncated", lineno + 1);
        ++lineno;
        return std::istringstream(line);
    };
    auto expect = [&](std::istringstream& ss, const std::string& key) {
        std::string k;
        ss >> k;
        if (k != key) throw FormatError("expected '" + key + "' in weights header", lineno);
    };
    {
        auto ss = next();
        std::string magic;
        ss >> magic;
        if (magic != kMagic) throw FormatError("not a weights file (bad magic)", lineno);
    }
    {
        auto ss = next();
        expect(ss, "version");
        int v = 0;
        ss >> v;
        if (v != 1) throw VersionMismatch("unsupported weights version " + std::to_string(v));
    }
    Architecture a;
    {
        auto ss = next();
        expect(ss, "latent");
        ss >> a.latent_dim;
    }
    {
        auto ss = next();
        expect(ss, "input");
        ss >> a.height >> a.width;
    }
    {
        auto ss = next();
        expect(ss, "encoder");
        a.encoder_channels = ints(ss);
    }
    {
        auto ss = next();
        expect(ss, "decoder_base");
        ss >> a.decoder_base_channels;
    }
    {
        auto ss = next();
        expect(ss, "decoder");
        a.decoder_channels = ints(ss);
    }
    {
        auto ss = next();
        expect(ss, "regressor");
        a.regressor_hidden = ints(ss);
    }
    LatentModel model(a);
    {
        auto ss = next();
        expect(ss, "label_mean");
        for (auto& v : model.label_scaler.mean)
            if (!(ss >> v)) throw FormatError("bad label_mean", lineno);
    }
    {
        auto ss = next();
        expect(ss, "label_scale");
        for (auto& v : model.label_scaler.scale)
            if (!(ss >> v)) throw FormatError("bad label_scale", lineno);
    }
    auto params = model.params();
    {
        auto ss = next();
        expect(ss, "layers");
        std::size_t count = 0;
        ss >> count;
        if (count != params.size()) throw FormatError("layer manifest does not match the architecture", lineno);
    }
    for (auto& p : params) {
        auto ss = next();
        std::string name;
        Eigen::Index rows = 0, cols = 0;
        ss >> name >> rows >> cols;
        if (name != p.name || rows != p.value->rows() || cols != p.value->cols())
            throw FormatError("layer manifest entry mismatch for " + p.name, lineno);
    }
    {
        auto ss = next();
        expect(ss, "data");
    }
    for (auto& p : params) read_doubles(is, *p.value);
    return model;
}

void write_loss_history(const std::vector<EpochLoss>& history, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open loss history file: " + path.string());
    os << "epoch,recon,kl,reg,total\n";
    char buf[256];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.mean.recon, e.mean.kl, e.mean.reg,
                      e.mean.total);
        os << buf;
    }
}

}  // namespace metadesign
