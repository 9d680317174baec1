// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/lstmformer.h"

#include <cmath>

#include "tss/errors.h"
#include "tss/rng.h"

namespace tss {
namespace {

DenseParams make_dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(in));
  Tensor w({in, out});
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return {Variable(name + ".w", std::move(w)), Variable(name + ".b", Tensor({out}))};
}

LstmParams make_lstm(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(hidden));
  Tensor wx({in, 4 * hidden});
  Tensor wh({hidden, 4 * hidden});
  for (double& v : wx.values()) v = rng.uniform(-bound, bound);
  for (double& v : wh.values()) v = rng.uniform(-bound, bound);
  Tensor b({4 * hidden});
  for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;  // forget gate
  return {Variable(name + ".wx", std::move(wx)), Variable(name + ".wh", std::move(wh)),
          Variable(name + ".b", std::move(b))};
}

NormParams make_norm(const std::string& name, std::size_t dim) {
  return {Variable(name + ".gamma", Tensor({dim}, 1.0)), Variable(name + ".beta", Tensor({dim}))};
}

std::uint64_t dense_macs(std::size_t frames, std::size_t in, std::size_t out) {
  return std::uint64_t(frames) * in * out;
}

std::uint64_t lstm_macs(std::size_t frames, std::size_t in, std::size_t hidden) {
  return std::uint64_t(frames) * 4 * hidden * (in + hidden);
}

BoundModel::Dense bind_dense(Tape& tape, DenseParams& p) {
  return {tape.parameter(p.w), tape.parameter(p.b)};
}

Value dense(Tape& tape, const BoundModel::Dense& d, Value x) { return linear(tape, x, d.w, d.b); }

Value checked(Tape& tape, Value v, const char* layer) {
  if (!tape.value(v).all_finite()) {
    throw NumericalError(std::string("non-finite activation in layer ") + layer);
  }
  return v;
}

}  // namespace

std::vector<Variable*> ModelParams::variables() {
  std::vector<Variable*> out;
  const auto dense = [&](DenseParams& d) {
    out.push_back(&d.w);
    out.push_back(&d.b);
  };
  const auto rec = [&](LstmParams& l) {
    out.push_back(&l.wx);
    out.push_back(&l.wh);
    out.push_back(&l.b);
  };
  const auto norm = [&](NormParams& n) {
    out.push_back(&n.gamma);
    out.push_back(&n.beta);
  };
  dense(in_fc);
  dense(fc1);
  rec(lstm1);
  norm(ln1);
  dense(fc2);
  dense(fc3);
  rec(lstm2);
  norm(ln2);
  dense(fc4);
  dense(fc5);
  dense(fc6);
  if (mask_compress) dense(*mask_compress);
  return out;
}

std::vector<const Variable*> ModelParams::variables() const {
  auto vars = const_cast<ModelParams*>(this)->variables();
  return {vars.begin(), vars.end()};
}

void ModelParams::zero_grad() {
  for (Variable* v : variables()) v->zero_grad();
}

ModelParams build_model(const ModelConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng(seed);
  ModelParams p;
  p.config = c;
  p.in_fc = make_dense("in_fc", c.input_dim(), c.compress_dim, rng);
  p.fc1 = make_dense("fc1", c.compress_dim + c.embedding_dim, c.fc1_dim, rng);
  p.lstm1 = make_lstm("lstm1", c.fc1_dim, c.lstm_hidden, rng);
  p.ln1 = make_norm("ln1", c.lstm_hidden);
  p.fc2 = make_dense("fc2", c.lstm_hidden, c.fc2_dim, rng);
  p.fc3 = make_dense("fc3", c.fc2_dim, c.compress_dim, rng);
  p.lstm2 = make_lstm("lstm2", c.compress_dim, c.lstm_hidden, rng);
  p.ln2 = make_norm("ln2", c.lstm_hidden);
  p.fc4 = make_dense("fc4", c.lstm_hidden, c.fc4_dim, rng);
  p.fc5 = make_dense("fc5", c.fc4_dim, c.compress_dim, rng);
  p.fc6 = make_dense("fc6", c.compress_dim, c.fc6_dim, rng);
  if (c.mask_compress) p.mask_compress = make_dense("mask_compress", c.fc6_dim, c.bins, rng);
  return p;
}

std::size_t count_params(const ModelParams& params) {
  std::size_t n = 0;
  for (const Variable* v : params.variables()) {
    if (v->trainable) n += v->value.size();
  }
  return n;
}

MacReport mac_report(const ModelConfig& c, double input_seconds) {
  MacReport r;
  const auto samples = std::size_t(std::llround(std::max(0.0, input_seconds) * kSampleRate));
  r.frames = samples < c.stft.window_length
                 ? 0
                 : 1 + (samples - c.stft.window_length) / c.stft.hop;
  const std::size_t t = r.frames;
  r.layers = {
      {"in_fc", dense_macs(t, c.input_dim(), c.compress_dim)},
      {"fc1", dense_macs(t, c.compress_dim + c.embedding_dim, c.fc1_dim)},
      {"lstm1", lstm_macs(t, c.fc1_dim, c.lstm_hidden)},
      {"fc2", dense_macs(t, c.lstm_hidden, c.fc2_dim)},
      {"fc3", dense_macs(t, c.fc2_dim, c.compress_dim)},
      {"lstm2", lstm_macs(t, c.compress_dim, c.lstm_hidden)},
      {"fc4", dense_macs(t, c.lstm_hidden, c.fc4_dim)},
      {"fc5", dense_macs(t, c.fc4_dim, c.compress_dim)},
      {"fc6", dense_macs(t, c.compress_dim, c.fc6_dim)},
  };
  if (c.mask_compress) r.layers.push_back({"mask_compress", dense_macs(t, c.fc6_dim, c.bins)});
  for (const auto& l : r.layers) r.network += l.macs;
  // A frame of the analysis Conv1D maps window_length samples onto real and
  // imaginary parts of every bin; synthesis is the transpose.
  const std::uint64_t conv = std::uint64_t(t) * c.stft.window_length * 2 * c.stft.bins();
  r.layers.push_back({"stft", conv * c.channels()});
  r.layers.push_back({"istft", conv});
  r.transforms = conv * (c.channels() + 1);
  return r;
}

std::uint64_t count_macs(const ModelConfig& config, double input_seconds) {
  return mac_report(config, input_seconds).network;
}

BoundModel bind(Tape& tape, ModelParams& p) {
  BoundModel m;
  m.config = &p.config;
  m.in_fc = bind_dense(tape, p.in_fc);
  m.fc1 = bind_dense(tape, p.fc1);
  m.lstm1 = {tape.parameter(p.lstm1.wx), tape.parameter(p.lstm1.wh), tape.parameter(p.lstm1.b)};
  m.ln1_gamma = tape.parameter(p.ln1.gamma);
  m.ln1_beta = tape.parameter(p.ln1.beta);
  m.fc2 = bind_dense(tape, p.fc2);
  m.fc3 = bind_dense(tape, p.fc3);
  m.lstm2 = {tape.parameter(p.lstm2.wx), tape.parameter(p.lstm2.wh), tape.parameter(p.lstm2.b)};
  m.ln2_gamma = tape.parameter(p.ln2.gamma);
  m.ln2_beta = tape.parameter(p.ln2.beta);
  m.fc4 = bind_dense(tape, p.fc4);
  m.fc5 = bind_dense(tape, p.fc5);
  m.fc6 = bind_dense(tape, p.fc6);
  if (p.mask_compress) m.mask_compress = bind_dense(tape, *p.mask_compress);
  return m;
}

Tensor feature_transform(const Tensor& mag, FeatureTransform transform) {
  if (transform == FeatureTransform::kLinear) return mag;
  Tensor out = mag;
  for (double& v : out.values()) v = std::log1p(v);
  return out;
}

Value compress_magnitudes(Tape& tape, const BoundModel& model, const Tensor& m1,
                          const Tensor* m2) {
  const ModelConfig& c = *model.config;
  if (c.dual() && !m2) throw PreconditionError("dual variant needs both channel magnitudes");
  if (!c.dual() && m2) {
    throw PreconditionError(variant_name(c.variant) + " variant takes a single magnitude");
  }
  if (m1.rank() != 2 || m1.cols() != c.bins || (m2 && !m2->same_shape(m1))) {
    throw DimensionError("magnitudes must be T x " + std::to_string(c.bins) + ", got " +
                         m1.shape_string() + (m2 ? " and " + m2->shape_string() : ""));
  }
  Tensor in({m1.rows(), c.input_dim()});
  const Tensor f1 = feature_transform(m1, c.features);
  const Tensor f2 = m2 ? feature_transform(*m2, c.features) : Tensor();
  for (std::size_t t = 0; t < m1.rows(); ++t) {
    auto dst = in.row(t);
    auto a = f1.row(t);
    std::copy(a.begin(), a.end(), dst.begin());
    if (m2) {
      auto b = f2.row(t);
      std::copy(b.begin(), b.end(), dst.begin() + long(c.bins));
    }
  }
  return checked(tape, dense(tape, model.in_fc, tape.constant(std::move(in))), "in_fc");
}

Value backbone_forward(Tape& tape, const BoundModel& model, Value compressed,
                       const SpeakerEmbedding& embedding) {
  const ModelConfig& c = *model.config;
  if (embedding.dim() != c.embedding_dim) {
    throw DimensionError("embedding has " + std::to_string(embedding.dim()) +
                         " dimensions, model expects " + std::to_string(c.embedding_dim));
  }
  const std::size_t frames = tape.value(compressed).rows();
  Tensor emb({frames, c.embedding_dim});
  for (std::size_t t = 0; t < frames; ++t) {
    std::copy(embedding.vector.begin(), embedding.vector.end(), emb.row(t).begin());
  }
  Value h = concat_cols(tape, compressed, tape.constant(std::move(emb)));
  h = checked(tape, relu(tape, dense(tape, model.fc1, h)), "fc1");
  h = checked(tape, lstm(tape, h, model.lstm1), "lstm1");
  h = add(tape, layer_norm(tape, h, model.ln1_gamma, model.ln1_beta), compressed);
  h = checked(tape, h, "ln1");
  h = checked(tape, relu(tape, dense(tape, model.fc2, h)), "fc2");
  h = checked(tape, relu(tape, dense(tape, model.fc3, h)), "fc3");
  h = checked(tape, lstm(tape, h, model.lstm2), "lstm2");
  h = add(tape, layer_norm(tape, h, model.ln2_gamma, model.ln2_beta), compressed);
  h = checked(tape, h, "ln2");
  h = checked(tape, relu(tape, dense(tape, model.fc4, h)), "fc4");
  h = checked(tape, relu(tape, dense(tape, model.fc5, h)), "fc5");
  h = checked(tape, dense(tape, model.fc6, h), "fc6");
  if (c.mask_compress) h = checked(tape, dense(tape, model.mask_compress, h), "mask_compress");
  return sigmoid(tape, h);
}

Value istft_op(Tape& tape, const Stft& stft, Value mag, const Tensor& phase,
               std::size_t out_length) {
  std::vector<double> wave = stft.synthesize(tape.value(mag), phase, out_length);
  Tensor out({out_length}, std::move(wave));
  return tape.record(std::move(out), {mag}, [&stft, mag, phase](Tape& t, const Tensor& g) {
    const Tensor adj = stft.synthesize_mag_adjoint(phase, g.values());
    Tensor& gm = t.grad(mag);
    for (std::size_t i = 0; i < adj.size(); ++i) gm[i] += adj[i];
  });
}

SeparationGraph separation_forward(Tape& tape, const BoundModel& model, const Stft& stft,
                                   const Waveform& mix, const SpeakerEmbedding& embedding,
                                   std::size_t channel) {
  const ModelConfig& c = *model.config;
  if (stft.config() != c.stft || stft.bins() != c.bins) {
    throw ConfigError("model expects " + std::to_string(c.bins) +
                      " bins from its own STFT configuration");
  }
  if (c.dual() && mix.num_channels() != 2) {
    throw PreconditionError("dual variant needs a 2-channel mixture, got " +
                            std::to_string(mix.num_channels()));
  }
  if (channel >= mix.num_channels() || (c.dual() && channel != 0)) {
    throw PreconditionError("invalid reference channel " + std::to_string(channel));
  }
  const SpectrogramPair ref = stft.analyze(mix.channel(channel));
  std::optional<SpectrogramPair> other;
  if (c.dual()) other = stft.analyze(mix.channel(1));
  const Value compressed =
      compress_magnitudes(tape, model, ref.mag, other ? &other->mag : nullptr);
  const Value mask = backbone_forward(tape, model, compressed, embedding);
  const Value est = mul(tape, tape.constant(ref.mag), mask);
  const Value wave = istft_op(tape, stft, est, ref.phase, mix.length());
  return {mask, wave};
}

// The untaped helpers never run a reverse pass, so the parameters are only
// read.
Tensor compress_magnitudes(const ModelParams& params, const Tensor& m1, const Tensor* m2) {
  Tape tape;
  const BoundModel model = bind(tape, const_cast<ModelParams&>(params));
  return tape.value(compress_magnitudes(tape, model, m1, m2));
}

Tensor estimate_mask(const ModelParams& params, const Tensor& m1, const Tensor* m2,
                     const SpeakerEmbedding& embedding) {
  Tape tape;
  const BoundModel model = bind(tape, const_cast<ModelParams&>(params));
  return tape.value(backbone_forward(tape, model, compress_magnitudes(tape, model, m1, m2),
                                     embedding));
}

Waveform separate_utterance(const Waveform& mix, const SpeakerEmbedding& embedding,
                            const ModelParams& params, std::size_t channel) {
  const Stft stft(params.config.stft);
  Tape tape;
  const BoundModel model = bind(tape, const_cast<ModelParams&>(params));
  const SeparationGraph g = separation_forward(tape, model, stft, mix, embedding, channel);
  const auto v = tape.value(g.waveform).values();
  return Waveform::mono({v.begin(), v.end()});
}

}  // namespace tss
