#include "pmaug/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pmaug/errors.hpp"
#include "pmaug/intrinsic.hpp"
#include "pmaug/io.hpp"
#include "pmaug/seed.hpp"

namespace pmaug {

namespace {

constexpr int kCheckpointVersion = 1;

std::vector<LayerShape> chain(std::size_t in, const std::vector<std::size_t>& hidden,
                              std::size_t out) {
  std::vector<LayerShape> layers;
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    layers.push_back({prev, h, Activation::kTanh});
    prev = h;
  }
  layers.push_back({prev, out, Activation::kLinear});
  return layers;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Per-class groups of batch rows; unlabeled batches form one group.
std::vector<std::vector<std::size_t>> class_groups(const PointCloud& batch) {
  if (!batch.has_labels()) {
    std::vector<std::size_t> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    return {all};
  }
  std::vector<std::vector<std::size_t>> groups;
  for (int c : batch.classes()) groups.push_back(batch.indices_of(c));
  return groups;
}

LossBreakdown evaluate(const AutoencoderModel& model, const PointCloud& batch, std::size_t k1,
                       std::size_t k2, std::vector<double>* grad_enc,
                       std::vector<double>* grad_dec) {
  if (batch.empty()) throw ArgumentError("loss: empty batch");
  if (batch.dim() != model.input_dim())
    throw ArgumentError("loss: batch dimension does not match the model input");
  const std::size_t n = batch.size();
  const std::size_t m = model.latent_dim;
  const bool want_grad = grad_enc != nullptr;

  std::vector<Mlp::Tape> enc_tapes(n), dec_tapes(n);
  PointCloud latents(m);
  LossBreakdown out;
  for (std::size_t i = 0; i < n; ++i) {
    model.encoder.forward(batch.point(i), enc_tapes[i]);
    model.decoder.forward(enc_tapes[i].acts.back(), dec_tapes[i]);
    latents.push_back(enc_tapes[i].acts.back());
    const auto x = batch.point(i);
    const auto& xr = dec_tapes[i].acts.back();
    for (std::size_t j = 0; j < x.size(); ++j) out.recon += (xr[j] - x[j]) * (xr[j] - x[j]);
  }
  out.weight_reg = model.alpha * (model.encoder.weight_l2() + model.decoder.weight_l2());

  std::vector<double> dz(want_grad ? n * m : 0, 0.0);
  if (model.beta > 0.0) {
    for (const auto& rows : class_groups(batch)) {
      if (rows.size() < k2 + 1) continue;
      const PointCloud group = latents.subset(rows);
      try {
        if (want_grad) {
          const auto lg = intrinsic_loss_and_gradient(group, k1, k2, ExecPolicy::kSerial);
          out.intrinsic += lg.loss;
          for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t j = 0; j < m; ++j)
              dz[rows[r] * m + j] += model.beta * lg.gradient[r * m + j];
        } else {
          out.intrinsic += class_dim(group, k1, k2, ExecPolicy::kSerial).aggregate;
        }
        ++out.classes_used;
      } catch (const DegeneracyError&) {
      }
    }
  }
  out.total = out.recon + out.weight_reg + model.beta * out.intrinsic;
  if (!want_grad) return out;

  grad_enc->assign(model.encoder.num_params(), 0.0);
  grad_dec->assign(model.decoder.num_params(), 0.0);
  std::vector<double> dxr(batch.dim()), dzi(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = batch.point(i);
    const auto& xr = dec_tapes[i].acts.back();
    for (std::size_t j = 0; j < x.size(); ++j) dxr[j] = 2.0 * (xr[j] - x[j]);
    model.decoder.backward(dec_tapes[i], dxr, *grad_dec, dzi);
    for (std::size_t j = 0; j < m; ++j) dzi[j] += dz[i * m + j];
    model.encoder.backward(enc_tapes[i], dzi, *grad_enc);
  }
  model.encoder.add_weight_l2_grad(model.alpha, *grad_enc);
  model.decoder.add_weight_l2_grad(model.alpha, *grad_dec);
  return out;
}

}  // namespace

AutoencoderModel AutoencoderModel::make(std::size_t input_dim, std::size_t latent_dim,
                                        std::vector<std::size_t> hidden, std::uint64_t seed,
                                        double alpha, double beta) {
  if (input_dim == 0 || latent_dim == 0) throw ArgumentError("autoencoder: zero dimension");
  AutoencoderModel model;
  model.latent_dim = latent_dim;
  model.alpha = alpha;
  model.beta = beta;
  model.encoder = Mlp(chain(input_dim, hidden, latent_dim));
  std::reverse(hidden.begin(), hidden.end());
  model.decoder = Mlp(chain(latent_dim, hidden, input_dim));
  Rng rng(derive_seed(seed, "autoencoder.init"));
  model.encoder.init_glorot(rng);
  model.decoder.init_glorot(rng);
  return model;
}

void AutoencoderModel::validate() const {
  if (encoder.output_dim() != latent_dim || decoder.input_dim() != latent_dim)
    throw ConsistencyError("autoencoder: latent dimensions disagree");
  if (decoder.output_dim() != encoder.input_dim())
    throw ConsistencyError("autoencoder: decoder output does not match encoder input");
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw ConsistencyError("autoencoder: alpha and beta must be nonnegative");
  if (!all_finite(encoder.params()) || !all_finite(decoder.params()))
    throw ConsistencyError("autoencoder: non-finite parameter");
}

AutoencoderModel::Output AutoencoderModel::forward(std::span<const double> x) const {
  Output out;
  out.z = encoder.forward(x);
  out.reconstruction = decoder.forward(out.z);
  return out;
}

PointCloud AutoencoderModel::encode(const PointCloud& data) const {
  if (data.dim() != input_dim()) throw ArgumentError("encode: dimension mismatch");
  PointCloud out(latent_dim);
  std::vector<double> z(latent_dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    encoder.forward(data.point(i), z);
    if (data.has_labels())
      out.push_back(z, data.label(i));
    else
      out.push_back(z);
  }
  return out;
}

PointCloud AutoencoderModel::decode(const PointCloud& latents) const {
  if (latents.dim() != latent_dim) throw ArgumentError("decode: dimension mismatch");
  PointCloud out(decoder.output_dim());
  std::vector<double> x(decoder.output_dim());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    decoder.forward(latents.point(i), x);
    if (latents.has_labels())
      out.push_back(x, latents.label(i));
    else
      out.push_back(x);
  }
  return out;
}

nlohmann::json AutoencoderModel::to_json() const {
  return {{"encoder", encoder.to_json()},
          {"decoder", decoder.to_json()},
          {"latent_dim", latent_dim},
          {"alpha", alpha},
          {"beta", beta}};
}

AutoencoderModel AutoencoderModel::from_json(const nlohmann::json& j) {
  AutoencoderModel model;
  try {
    model.encoder = Mlp::from_json(j.at("encoder"));
    model.decoder = Mlp::from_json(j.at("decoder"));
    model.latent_dim = j.at("latent_dim").get<std::size_t>();
    model.alpha = j.at("alpha").get<double>();
    model.beta = j.at("beta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("autoencoder JSON: ") + e.what());
  }
  model.validate();
  return model;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
  if (batch_size == 0) throw ArgumentError("batch_size must be positive");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ArgumentError("alpha and beta must be nonnegative");
  if (k1 < 2 || k2 < k1) throw ArgumentError("need 2 <= k1 <= k2");
  if (beta > 0.0 && batch_size < k2 + 2)
    throw ArgumentError("batch_size must be at least k2 + 2 when beta > 0");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size}, {"epochs", epochs},
          {"seed", seed}, {"beta", beta}, {"alpha", alpha}, {"k1", k1}, {"k2", k2}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.beta = j.at("beta").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.k1 = j.at("k1").get<std::size_t>();
    c.k2 = j.at("k2").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train config JSON: ") + e.what());
  }
  return c;
}

LossBreakdown loss(const AutoencoderModel& model, const PointCloud& batch, std::size_t k1,
                   std::size_t k2) {
  return evaluate(model, batch, k1, k2, nullptr, nullptr);
}

LossBreakdown loss_and_gradient(const AutoencoderModel& model, const PointCloud& batch,
                                std::size_t k1, std::size_t k2, std::vector<double>& grad_encoder,
                                std::vector<double>& grad_decoder) {
  return evaluate(model, batch, k1, k2, &grad_encoder, &grad_decoder);
}

TrainResult train(AutoencoderModel model, const PointCloud& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ArgumentError("train: empty data");
  if (data.dim() != model.input_dim()) throw ArgumentError("train: data dimension mismatch");
  model.alpha = config.alpha;
  model.beta = config.beta;
  model.validate();

  Rng rng(derive_seed(config.seed, "autoencoder.shuffle"));
  Adam enc_opt, dec_opt;
  enc_opt.learning_rate = dec_opt.learning_rate = config.learning_rate;
  std::vector<double> g_enc, g_dec;
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < perm.size(); start += config.batch_size) {
      const std::size_t stop = std::min(perm.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(perm.data() + start, stop - start);
      const PointCloud batch = data.subset(rows);
      const LossBreakdown lb = loss_and_gradient(model, batch, config.k1, config.k2, g_enc, g_dec);
      if (!std::isfinite(lb.total) || !all_finite(g_enc) || !all_finite(g_dec)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << batches + 1
            << " (recon=" << lb.recon << ", weight_reg=" << lb.weight_reg
            << ", intrinsic=" << lb.intrinsic << ")";
        throw TrainingError(msg.str());
      }
      enc_opt.step(model.encoder.params(), g_enc);
      dec_opt.step(model.decoder.params(), g_dec);
      rec.recon += lb.recon;
      rec.intrinsic += lb.intrinsic;
      rec.total += lb.total;
      ++batches;
    }
    rec.intrinsic /= static_cast<double>(batches);
    rec.weight_reg = model.alpha * (model.encoder.weight_l2() + model.decoder.weight_l2());
    if (!all_finite(model.encoder.params()) || !all_finite(model.decoder.params()))
      throw TrainingError("non-finite parameter after epoch " + std::to_string(epoch));
    result.history.push_back(rec);
  }
  result.model = std::move(model);
  return result;
}

nlohmann::json history_to_json(std::span<const EpochRecord> history) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : history)
    arr.push_back({{"epoch", r.epoch}, {"recon", r.recon}, {"weight_reg", r.weight_reg},
                   {"intrinsic", r.intrinsic}, {"total", r.total}});
  return arr;
}

void save_checkpoint(const AutoencoderModel& model, const TrainConfig& config,
                     std::span<const EpochRecord> history, const std::filesystem::path& path) {
  nlohmann::json j = model.to_json();
  j["format"] = "pmaug-autoencoder";
  j["version"] = kCheckpointVersion;
  j["config"] = config.to_json();
  j["history"] = history_to_json(history);
  write_json(j, path);
}

AutoencoderModel load_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json j = read_json(path);
  if (j.value("format", "") != "pmaug-autoencoder")
    throw FormatError(path.string() + ": not an autoencoder checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version");
  return AutoencoderModel::from_json(j);
}

}  // namespace pmaug
