// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tss/embedding.h"
#include "tss/model_config.h"
#include "tss/ops.h"
#include "tss/stft.h"
#include "tss/waveform.h"

namespace tss {

struct DenseParams {
  Variable w;  // Din x Dout
  Variable b;  // Dout
};

struct LstmParams {
  Variable wx;  // Din x 4H
  Variable wh;  // H x 4H
  Variable b;   // 4H
};

struct NormParams {
  Variable gamma;
  Variable beta;
};

struct ModelParams {
  ModelConfig config;
  DenseParams in_fc;  // compresses the stacked channel magnitudes
  DenseParams fc1, fc2, fc3, fc4, fc5, fc6;
  LstmParams lstm1, lstm2;
  NormParams ln1, ln2;
  std::optional<DenseParams> mask_compress;  // dual only

  // Stable order; pointers stay valid while this object is alive and unmoved.
  std::vector<Variable*> variables();
  std::vector<const Variable*> variables() const;
  void zero_grad();
};

ModelParams build_model(const ModelConfig& config, std::uint64_t seed);
std::size_t count_params(const ModelParams& params);

struct LayerCost {
  std::string name;
  std::uint64_t macs = 0;
};

struct MacReport {
  std::size_t frames = 0;
  std::uint64_t network = 0;     // FC and LSTM layers
  std::uint64_t transforms = 0;  // analysis and synthesis as fixed Conv1D
  std::vector<LayerCost> layers;

  std::uint64_t total() const { return network + transforms; }
};

MacReport mac_report(const ModelConfig& config, double input_seconds = 1.0);
// Multiply-accumulates of the FC/LSTM stack for `input_seconds` of audio.
std::uint64_t count_macs(const ModelConfig& config, double input_seconds = 1.0);

// Parameter nodes of one model on one tape.
struct BoundModel {
  struct Dense {
    Value w, b;
  };
  const ModelConfig* config = nullptr;
  Dense in_fc, fc1, fc2, fc3, fc4, fc5, fc6, mask_compress;
  LstmWeights lstm1, lstm2;
  Value ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
};

BoundModel bind(Tape& tape, ModelParams& params);

Tensor feature_transform(const Tensor& mag, FeatureTransform transform);

// T x C features from the raw magnitudes. Dual needs m2; single variants
// must not get one.
Value compress_magnitudes(Tape& tape, const BoundModel& model, const Tensor& m1,
                          const Tensor* m2);
// Mask in [0, 1], T x F.
Value backbone_forward(Tape& tape, const BoundModel& model, Value compressed,
                       const SpeakerEmbedding& embedding);

// Taped overlap-add synthesis with fixed phase; differentiable in `mag`.
// `stft` must outlive the tape.
Value istft_op(Tape& tape, const Stft& stft, Value mag, const Tensor& phase,
               std::size_t out_length);

struct SeparationGraph {
  Value mask;      // T x F
  Value waveform;  // rank-1, length of the mixture
};

// Full taped pipeline. `channel` selects the reference channel of a
// single-channel variant; dual always masks channel 1 (index 0).
SeparationGraph separation_forward(Tape& tape, const BoundModel& model, const Stft& stft,
                                   const Waveform& mix, const SpeakerEmbedding& embedding,
                                   std::size_t channel = 0);

// Untaped conveniences.
Tensor compress_magnitudes(const ModelParams& params, const Tensor& m1, const Tensor* m2);
Tensor estimate_mask(const ModelParams& params, const Tensor& m1, const Tensor* m2,
                     const SpeakerEmbedding& embedding);
Waveform separate_utterance(const Waveform& mix, const SpeakerEmbedding& embedding,
                            const ModelParams& params, std::size_t channel = 0);

}  // namespace tss
