#pragma once

// Shallow undercomplete autoencoder: h = tanh(We x + be), o = Wd h + bd,
// trained on mean-square reconstruction error, plus a logistic head on the
// latent code that can be trained with the encoder frozen or jointly (fine
// tuning).

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"
#include "ivikit/estimators.hpp"
#include "ivikit/rng.hpp"

namespace ivikit {

struct ShallowAutoencoder {
    Eigen::MatrixXd encoder_weights;  // d x D
    Eigen::VectorXd encoder_bias;     // d
    Eigen::MatrixXd decoder_weights;  // D x d
    Eigen::VectorXd decoder_bias;     // D

    Eigen::Index input_dim() const { return encoder_weights.cols(); }
    Eigen::Index latent_dim() const { return encoder_weights.rows(); }

    bool operator==(const ShallowAutoencoder& o) const {
        return encoder_weights == o.encoder_weights && encoder_bias == o.encoder_bias && decoder_weights == o.decoder_weights &&
               decoder_bias == o.decoder_bias;
    }

    static ShallowAutoencoder zeros(Eigen::Index input_dim, Eigen::Index latent_dim) {
        return {Eigen::MatrixXd::Zero(latent_dim, input_dim), Eigen::VectorXd::Zero(latent_dim),
                Eigen::MatrixXd::Zero(input_dim, latent_dim), Eigen::VectorXd::Zero(input_dim)};
    }
};

struct ClassifierHead {
    Eigen::VectorXd weights;  // d
    double bias = 0.0;

    bool operator==(const ClassifierHead& o) const { return weights == o.weights && bias == o.bias; }
};

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    std::optional<double> loss_floor;  // stop once the epoch loss is at or below this
};

struct AutoencoderFit {
    ShallowAutoencoder model;
    double initial_loss = 0.0;
    std::vector<double> loss_trace;  // full-data loss after each epoch
};

struct HeadFit {
    ClassifierHead head;
    double initial_loss = 0.0;
    std::vector<double> loss_trace;
};

struct FineTuneFit {
    ShallowAutoencoder model;
    ClassifierHead head;
    double initial_loss = 0.0;
    std::vector<double> loss_trace;
};

struct Reconstruction {
    Eigen::MatrixXd output;
    double mse = 0.0;
};

namespace detail {

inline void check_input(const ShallowAutoencoder& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.input_dim())
        throw InvalidArgument("autoencoder: input has " + std::to_string(x.cols()) + " columns, model expects " +
                              std::to_string(model.input_dim()));
}

inline Eigen::VectorXd labels01(const LabelVector& y) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) t[static_cast<Eigen::Index>(i)] = y[i] > 0 ? 1.0 : 0.0;
    return t;
}

inline void check_config(const TrainConfig& cfg, std::size_t rows) {
    if (cfg.batch_size == 0 || cfg.batch_size > rows) throw InvalidArgument("train: batch_size must lie in [1, rows]");
    if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("train: learning_rate must be positive");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw InvalidArgument("train: momentum must lie in [0, 1)");
}

/// Shuffled row order for one epoch, drawn from Rng(derive_seed(seed, epoch)).
inline std::vector<std::size_t> epoch_order(std::size_t rows, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), x.cols());
    for (std::size_t i = begin; i < end; ++i) out.row(static_cast<Eigen::Index>(i - begin)) = x.row(static_cast<Eigen::Index>(order[i]));
    return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i) out[static_cast<Eigen::Index>(i - begin)] = v[static_cast<Eigen::Index>(order[i])];
    return out;
}

/// Mean binary cross-entropy of logits against 0/1 targets.
inline double bce_from_logits(const Eigen::VectorXd& logits, const Eigen::VectorXd& targets) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        // -t log s(z) - (1 - t) log(1 - s(z)) = log(1 + exp(-z)) + (1 - t) z
        loss += stable_log1p_exp_neg(logits[i]) + (1.0 - targets[i]) * logits[i];
    }
    return loss / static_cast<double>(logits.size());
}

}  // namespace detail

/// Latent codes, one row per input row: tanh(x We^T + be^T).
inline Eigen::MatrixXd encode(const ShallowAutoencoder& model, const Eigen::MatrixXd& x) {
    detail::check_input(model, x);
    return ((x * model.encoder_weights.transpose()).rowwise() + model.encoder_bias.transpose()).array().tanh().matrix();
}

inline Eigen::MatrixXd decode(const ShallowAutoencoder& model, const Eigen::MatrixXd& h) {
    return (h * model.decoder_weights.transpose()).rowwise() + model.decoder_bias.transpose();
}

/// Mean of squared element-wise differences over all L x D entries.
inline double mean_squared_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("mean_squared_error: shape mismatch");
    if (a.size() == 0) return 0.0;
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

inline Reconstruction reconstruct(const ShallowAutoencoder& model, const Eigen::MatrixXd& x) {
    Reconstruction r;
    r.output = decode(model, encode(model, x));
    r.mse = mean_squared_error(r.output, x);
    return r;
}

/// Probability of class +1 for each row.
inline Eigen::VectorXd head_scores(const ShallowAutoencoder& model, const ClassifierHead& head, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd logits = (encode(model, x) * head.weights).array() + head.bias;
    return logits.unaryExpr([](double z) { return detail::sigmoid(z); });
}

// ---------------------------------------------------------------------------
// Gradients

struct AutoencoderGradients {
    double loss = 0.0;
    Eigen::MatrixXd encoder_weights;
    Eigen::VectorXd encoder_bias;
    Eigen::MatrixXd decoder_weights;
    Eigen::VectorXd decoder_bias;
};

/// Reconstruction MSE over the rows of x and its gradient for every parameter block.
inline AutoencoderGradients reconstruction_gradients(const ShallowAutoencoder& model, const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd h = encode(model, x);
    const Eigen::MatrixXd o = decode(model, h);
    const Eigen::MatrixXd diff = o - x;
    AutoencoderGradients g;
    g.loss = diff.squaredNorm() / static_cast<double>(diff.size());
    const Eigen::MatrixXd d_out = 2.0 * diff / static_cast<double>(diff.size());      // L x D
    g.decoder_weights = d_out.transpose() * h;                                          // D x d
    g.decoder_bias = d_out.colwise().sum().transpose();                                 // D
    const Eigen::MatrixXd d_pre = (d_out * model.decoder_weights).array() * (1.0 - h.array().square());  // L x d
    g.encoder_weights = d_pre.transpose() * x;                                          // d x D
    g.encoder_bias = d_pre.colwise().sum().transpose();                                 // d
    return g;
}

struct ClassificationGradients {
    double loss = 0.0;
    Eigen::MatrixXd encoder_weights;
    Eigen::VectorXd encoder_bias;
    Eigen::VectorXd head_weights;
    double head_bias = 0.0;
};

/// Mean cross-entropy of the head on the encoded rows and its gradient with
/// respect to the encoder and head parameters. Labels are mapped -1 -> 0, +1 -> 1.
inline ClassificationGradients classification_gradients(const ShallowAutoencoder& model, const ClassifierHead& head,
                                                        const Eigen::MatrixXd& x, const Eigen::VectorXd& targets01) {
    const Eigen::MatrixXd h = encode(model, x);
    const Eigen::VectorXd logits = (h * head.weights).array() + head.bias;
    ClassificationGradients g;
    g.loss = detail::bce_from_logits(logits, targets01);
    const double scale = 1.0 / static_cast<double>(x.rows());
    const Eigen::VectorXd d_logit = (logits.unaryExpr([](double z) { return detail::sigmoid(z); }) - targets01) * scale;
    g.head_weights = h.transpose() * d_logit;
    g.head_bias = d_logit.sum();
    const Eigen::MatrixXd d_pre = (d_logit * head.weights.transpose()).array() * (1.0 - h.array().square());
    g.encoder_weights = d_pre.transpose() * x;
    g.encoder_bias = d_pre.colwise().sum().transpose();
    return g;
}

// ---------------------------------------------------------------------------
// Training

/// Random initial model: weights uniform in +-1/sqrt(fan_in) drawn from
/// Rng(seed) (encoder row-major, then decoder row-major), biases zero.
inline ShallowAutoencoder initialize_autoencoder(Eigen::Index input_dim, Eigen::Index latent_dim, std::uint64_t seed) {
    auto model = ShallowAutoencoder::zeros(input_dim, latent_dim);
    Rng rng(seed);
    const double enc = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double dec = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    for (Eigen::Index r = 0; r < latent_dim; ++r)
        for (Eigen::Index c = 0; c < input_dim; ++c) model.encoder_weights(r, c) = rng.uniform(-enc, enc);
    for (Eigen::Index r = 0; r < input_dim; ++r)
        for (Eigen::Index c = 0; c < latent_dim; ++c) model.decoder_weights(r, c) = rng.uniform(-dec, dec);
    return model;
}

/// Mini-batch gradient descent with momentum on the reconstruction MSE.
/// Initialization uses Rng(seed); epoch e visits rows in the order drawn from
/// Rng(derive_seed(seed, e)). Velocity update: v = momentum * v - rate * grad.
inline AutoencoderFit train_autoencoder(const Eigen::MatrixXd& x, Eigen::Index latent_dim, const TrainConfig& cfg) {
    if (latent_dim < 1 || latent_dim >= x.cols()) throw InvalidArgument("train_autoencoder: latent_dim must lie in [1, D)");
    detail::check_config(cfg, static_cast<std::size_t>(x.rows()));
    AutoencoderFit fit;
    fit.model = initialize_autoencoder(x.cols(), latent_dim, cfg.seed);
    auto& m = fit.model;
    fit.initial_loss = reconstruct(m, x).mse;

    auto v = ShallowAutoencoder::zeros(x.cols(), latent_dim);
    const auto rows = static_cast<std::size_t>(x.rows());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = detail::epoch_order(rows, cfg.seed, epoch);
        for (std::size_t begin = 0; begin < rows; begin += cfg.batch_size) {
            const auto end = std::min(rows, begin + cfg.batch_size);
            const auto g = reconstruction_gradients(m, detail::gather_rows(x, order, begin, end));
            v.encoder_weights = cfg.momentum * v.encoder_weights - cfg.learning_rate * g.encoder_weights;
            v.encoder_bias = cfg.momentum * v.encoder_bias - cfg.learning_rate * g.encoder_bias;
            v.decoder_weights = cfg.momentum * v.decoder_weights - cfg.learning_rate * g.decoder_weights;
            v.decoder_bias = cfg.momentum * v.decoder_bias - cfg.learning_rate * g.decoder_bias;
            m.encoder_weights += v.encoder_weights;
            m.encoder_bias += v.encoder_bias;
            m.decoder_weights += v.decoder_weights;
            m.decoder_bias += v.decoder_bias;
        }
        const double loss = reconstruct(m, x).mse;
        if (!std::isfinite(loss)) throw NumericError("train_autoencoder: loss diverged at epoch " + std::to_string(epoch + 1));
        fit.loss_trace.push_back(loss);
        if (cfg.loss_floor && loss <= *cfg.loss_floor) break;
    }
    return fit;
}

/// Logistic head on the frozen encoder's codes; starts from zero.
inline HeadFit train_head_frozen(const ShallowAutoencoder& model, const Eigen::MatrixXd& x, const LabelVector& y, const TrainConfig& cfg) {
    y.require_both_classes("train_head_frozen");
    if (y.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("train_head_frozen: label count mismatch");
    detail::check_config(cfg, y.size());
    const Eigen::MatrixXd h = encode(model, x);
    const Eigen::VectorXd t = detail::labels01(y);

    HeadFit fit;
    fit.head = {Eigen::VectorXd::Zero(model.latent_dim()), 0.0};
    auto loss_of = [&](const ClassifierHead& head) {
        return detail::bce_from_logits(((h * head.weights).array() + head.bias).matrix(), t);
    };
    fit.initial_loss = loss_of(fit.head);
    Eigen::VectorXd vw = Eigen::VectorXd::Zero(model.latent_dim());
    double vb = 0.0;
    const auto rows = y.size();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = detail::epoch_order(rows, cfg.seed, epoch);
        for (std::size_t begin = 0; begin < rows; begin += cfg.batch_size) {
            const auto end = std::min(rows, begin + cfg.batch_size);
            const Eigen::MatrixXd hb = detail::gather_rows(h, order, begin, end);
            const Eigen::VectorXd tb = detail::gather(t, order, begin, end);
            const Eigen::VectorXd logits = (hb * fit.head.weights).array() + fit.head.bias;
            const Eigen::VectorXd d = (logits.unaryExpr([](double z) { return detail::sigmoid(z); }) - tb) / static_cast<double>(end - begin);
            vw = cfg.momentum * vw - cfg.learning_rate * (hb.transpose() * d);
            vb = cfg.momentum * vb - cfg.learning_rate * d.sum();
            fit.head.weights += vw;
            fit.head.bias += vb;
        }
        const double loss = loss_of(fit.head);
        if (!std::isfinite(loss)) throw NumericError("train_head_frozen: loss diverged at epoch " + std::to_string(epoch + 1));
        fit.loss_trace.push_back(loss);
        if (cfg.loss_floor && loss <= *cfg.loss_floor) break;
    }
    return fit;
}

/// Joint cross-entropy training of encoder and head. The decoder is carried
/// along unchanged.
inline FineTuneFit fine_tune(const ShallowAutoencoder& model, const ClassifierHead& head, const Eigen::MatrixXd& x, const LabelVector& y,
                             const TrainConfig& cfg) {
    y.require_both_classes("fine_tune");
    if (y.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("fine_tune: label count mismatch");
    detail::check_input(model, x);
    detail::check_config(cfg, y.size());
    const Eigen::VectorXd t = detail::labels01(y);

    FineTuneFit fit{model, head, 0.0, {}};
    auto loss_of = [&] {
        return detail::bce_from_logits(((encode(fit.model, x) * fit.head.weights).array() + fit.head.bias).matrix(), t);
    };
    fit.initial_loss = loss_of();
    Eigen::MatrixXd v_we = Eigen::MatrixXd::Zero(model.latent_dim(), model.input_dim());
    Eigen::VectorXd v_be = Eigen::VectorXd::Zero(model.latent_dim());
    Eigen::VectorXd v_hw = Eigen::VectorXd::Zero(model.latent_dim());
    double v_hb = 0.0;
    const auto rows = y.size();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = detail::epoch_order(rows, cfg.seed, epoch);
        for (std::size_t begin = 0; begin < rows; begin += cfg.batch_size) {
            const auto end = std::min(rows, begin + cfg.batch_size);
            const auto g = classification_gradients(fit.model, fit.head, detail::gather_rows(x, order, begin, end),
                                                    detail::gather(t, order, begin, end));
            v_we = cfg.momentum * v_we - cfg.learning_rate * g.encoder_weights;
            v_be = cfg.momentum * v_be - cfg.learning_rate * g.encoder_bias;
            v_hw = cfg.momentum * v_hw - cfg.learning_rate * g.head_weights;
            v_hb = cfg.momentum * v_hb - cfg.learning_rate * g.head_bias;
            fit.model.encoder_weights += v_we;
            fit.model.encoder_bias += v_be;
            fit.head.weights += v_hw;
            fit.head.bias += v_hb;
        }
        const double loss = loss_of();
        if (!std::isfinite(loss)) throw NumericError("fine_tune: loss diverged at epoch " + std::to_string(epoch + 1));
        fit.loss_trace.push_back(loss);
        if (cfg.loss_floor && loss <= *cfg.loss_floor) break;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Model file
//
//   ivikit-autoencoder 1
//   input_dim <D>
//   latent_dim <d>
//   hidden_activation tanh
//   output_activation identity
//   encoder_weights <d> <D>      followed by d lines of D values (row-major)
//   encoder_bias <d>             followed by one line of d values
//   decoder_weights <D> <d>      followed by D lines of d values
//   decoder_bias <D>             followed by one line of D values
//   head <0|1>                   when 1: "head_weights <d>" + one line, "head_bias" + one value
//
// Values are written with 17 significant digits so they read back exactly.

namespace detail {

inline void write_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
        out << '\n';
    }
}

inline void write_vector(std::ostream& out, const std::string& name, const Eigen::VectorXd& v) {
    out << name << ' ' << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '\n';
}

inline void expect_token(std::istream& in, const std::string& token) {
    std::string got;
    if (!(in >> got) || got != token) throw DataError("model file: expected '" + token + "', found '" + got + "'");
}

inline Eigen::MatrixXd read_matrix(std::istream& in, const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    expect_token(in, name);
    Eigen::Index r = 0, c = 0;
    if (!(in >> r >> c) || r != rows || c != cols) throw DataError("model file: bad shape for " + name);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(in >> m(i, j))) throw DataError("model file: truncated " + name);
    return m;
}

inline Eigen::VectorXd read_vector(std::istream& in, const std::string& name, Eigen::Index size) {
    expect_token(in, name);
    Eigen::Index n = 0;
    if (!(in >> n) || n != size) throw DataError("model file: bad size for " + name);
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i)
        if (!(in >> v[i])) throw DataError("model file: truncated " + name);
    return v;
}

}  // namespace detail

inline std::string format_model(const ShallowAutoencoder& model, const std::optional<ClassifierHead>& head = std::nullopt) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "ivikit-autoencoder 1\n"
        << "input_dim " << model.input_dim() << "\nlatent_dim " << model.latent_dim() << '\n'
        << "hidden_activation tanh\noutput_activation identity\n";
    detail::write_matrix(out, "encoder_weights", model.encoder_weights);
    detail::write_vector(out, "encoder_bias", model.encoder_bias);
    detail::write_matrix(out, "decoder_weights", model.decoder_weights);
    detail::write_vector(out, "decoder_bias", model.decoder_bias);
    out << "head " << (head ? 1 : 0) << '\n';
    if (head) {
        detail::write_vector(out, "head_weights", head->weights);
        out << "head_bias " << head->bias << '\n';
    }
    return out.str();
}

struct LoadedModel {
    ShallowAutoencoder model;
    std::optional<ClassifierHead> head;
};

inline LoadedModel parse_model(const std::string& text) {
    std::istringstream in(text);
    detail::expect_token(in, "ivikit-autoencoder");
    int version = 0;
    if (!(in >> version) || version != 1) throw DataError("model file: unsupported version");
    Eigen::Index input_dim = 0, latent_dim = 0;
    detail::expect_token(in, "input_dim");
    in >> input_dim;
    detail::expect_token(in, "latent_dim");
    in >> latent_dim;
    if (!in || input_dim < 1 || latent_dim < 1) throw DataError("model file: bad dimensions");
    detail::expect_token(in, "hidden_activation");
    detail::expect_token(in, "tanh");
    detail::expect_token(in, "output_activation");
    detail::expect_token(in, "identity");
    LoadedModel out;
    out.model.encoder_weights = detail::read_matrix(in, "encoder_weights", latent_dim, input_dim);
    out.model.encoder_bias = detail::read_vector(in, "encoder_bias", latent_dim);
    out.model.decoder_weights = detail::read_matrix(in, "decoder_weights", input_dim, latent_dim);
    out.model.decoder_bias = detail::read_vector(in, "decoder_bias", input_dim);
    detail::expect_token(in, "head");
    int has_head = 0;
    in >> has_head;
    if (has_head == 1) {
        ClassifierHead head;
        head.weights = detail::read_vector(in, "head_weights", latent_dim);
        detail::expect_token(in, "head_bias");
        if (!(in >> head.bias)) throw DataError("model file: truncated head_bias");
        out.head = head;
    }
    return out;
}

}  // namespace ivikit
