#include "keyframe_dpc/lstm.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "keyframe_dpc/error.hpp"

namespace kfdpc::classify {
namespace {

constexpr std::array<char, 4> kMagic{'L', 'S', 'T', 'M'};

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw FormatError(std::string("non-finite value in ") + what);
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols) {
    throw FormatError(std::string(what) + " has shape " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                      ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  check_finite(m.data, what);
}

void check_gate(const Gate& gate, std::size_t input_dim, std::size_t hidden_dim) {
  check_shape(gate.input_weights, hidden_dim, input_dim, "gate input weights");
  check_shape(gate.recurrent_weights, hidden_dim, hidden_dim, "gate recurrent weights");
  if (gate.bias.size() != hidden_dim) throw FormatError("gate bias has the wrong length");
  check_finite(gate.bias, "gate bias");
}

// W_x x + W_h h + b, accumulated in column order.
std::vector<double> pre_activation(const Gate& gate, std::span<const double> x, std::span<const double> h) {
  std::vector<double> out(gate.bias);
  for (std::size_t r = 0; r < out.size(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) sum += gate.input_weights(r, c) * x[c];
    for (std::size_t c = 0; c < h.size(); ++c) sum += gate.recurrent_weights(r, c) * h[c];
    out[r] += sum;
  }
  return out;
}

template <typename Fill>
LstmParams build(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count, std::size_t num_layers,
                 BlockInput block_input, Fill&& fill) {
  if (input_dim == 0 || hidden_dim == 0 || class_count == 0 || num_layers == 0) {
    throw InvalidArgument("LSTM dimensions must be positive");
  }
  auto matrix = [&](std::size_t rows, std::size_t cols) {
    Matrix m = Matrix::zeros(rows, cols);
    for (auto& v : m.data) v = fill();
    return m;
  };
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = fill();
    return v;
  };
  LstmParams p;
  p.block_input = block_input;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = l == 0 ? input_dim : hidden_dim;
    LstmLayer layer;
    for (Gate* gate : {&layer.block, &layer.input, &layer.forget, &layer.output}) {
      gate->input_weights = matrix(hidden_dim, in);
      gate->recurrent_weights = matrix(hidden_dim, hidden_dim);
      gate->bias = vec(hidden_dim);
    }
    p.layers.push_back(std::move(layer));
  }
  p.classifier_weights = matrix(class_count, hidden_dim);
  p.classifier_bias = vec(class_count);
  return p;
}

std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError("truncated LSTM params file");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.put(static_cast<char>((v >> shift) & 0xff));
}

void read_values(std::istream& in, std::vector<double>& values) {
  for (auto& v : values) {
    v = std::bit_cast<float>(read_u32(in));
    if (!std::isfinite(v)) throw FormatError("non-finite value in LSTM params file");
  }
}

void write_values(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

}  // namespace

void LstmParams::validate() const {
  if (layers.empty()) throw FormatError("LSTM needs at least one layer");
  const std::size_t d = input_dim();
  const std::size_t h = hidden_dim();
  if (d == 0 || h == 0) throw FormatError("LSTM dimensions must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::size_t in = l == 0 ? d : h;
    for (const Gate* gate : {&layers[l].block, &layers[l].input, &layers[l].forget, &layers[l].output}) {
      check_gate(*gate, in, h);
    }
  }
  if (classifier_bias.empty()) throw FormatError("classifier needs at least one class");
  check_shape(classifier_weights, classifier_bias.size(), h, "classifier weights");
  check_finite(classifier_bias, "classifier bias");
  if (block_input != BlockInput::sigmoid && block_input != BlockInput::tanh) {
    throw FormatError("unknown block input mode");
  }
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count,
                             std::size_t num_layers, BlockInput block_input) {
  return build(input_dim, hidden_dim, class_count, num_layers, block_input, [] { return 0.0; });
}

LstmParams LstmParams::random(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count,
                              std::size_t num_layers, std::uint64_t seed, BlockInput block_input) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  return build(input_dim, hidden_dim, class_count, num_layers, block_input, [&] { return dist(rng); });
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmState lstm_step(std::span<const double> x, const LstmState& prev, const LstmLayer& layer, BlockInput block_input,
                    GateValues* gates) {
  const std::size_t h = layer.hidden_dim();
  if (x.size() != layer.input_dim()) {
    throw FormatError("LSTM input has " + std::to_string(x.size()) + " features, expected " +
                      std::to_string(layer.input_dim()));
  }
  if (prev.h.size() != h || prev.c.size() != h) throw FormatError("LSTM state has the wrong hidden size");
  check_finite(x, "LSTM input");

  auto g = pre_activation(layer.block, x, prev.h);
  auto i = pre_activation(layer.input, x, prev.h);
  auto f = pre_activation(layer.forget, x, prev.h);
  auto o = pre_activation(layer.output, x, prev.h);

  LstmState next{std::vector<double>(h), std::vector<double>(h)};
  for (std::size_t k = 0; k < h; ++k) {
    g[k] = block_input == BlockInput::sigmoid ? sigmoid(g[k]) : std::tanh(g[k]);
    i[k] = sigmoid(i[k]);
    f[k] = sigmoid(f[k]);
    o[k] = sigmoid(o[k]);
    next.c[k] = i[k] * g[k] + f[k] * prev.c[k];
    next.h[k] = o[k] * std::tanh(next.c[k]);
  }
  if (gates) *gates = {std::move(g), std::move(i), std::move(f), std::move(o)};
  return next;
}

std::vector<std::vector<double>> run_sequence(const FeatureMatrix& sequence, const LstmParams& params) {
  params.validate();
  if (sequence.cols() != params.input_dim()) {
    throw FormatError("features have " + std::to_string(sequence.cols()) + " columns but the LSTM expects " +
                      std::to_string(params.input_dim()));
  }
  std::vector<LstmState> states(params.num_layers(), LstmState::zeros(params.hidden_dim()));
  std::vector<std::vector<double>> outputs;
  outputs.reserve(sequence.rows());
  for (std::size_t t = 0; t < sequence.rows(); ++t) {
    std::vector<double> input(sequence.row(t).begin(), sequence.row(t).end());
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
      states[l] = lstm_step(input, states[l], params.layers[l], params.block_input);
      input = states[l].h;
    }
    outputs.push_back(std::move(input));
  }
  return outputs;
}

std::vector<std::vector<double>> run_zero_state(const FeatureMatrix& sequence, const LstmParams& params) {
  std::vector<std::vector<double>> outputs;
  outputs.reserve(sequence.rows());
  for (std::size_t t = 0; t < sequence.rows(); ++t) {
    const std::size_t row = t;
    auto single = run_sequence(sequence.select_rows(std::span<const std::size_t>(&row, 1)), params);
    outputs.push_back(std::move(single.front()));
  }
  return outputs;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("softmax of an empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - top);
    sum += out[k];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> predict_frame(std::span<const double> h, const LstmParams& params) {
  const Matrix& w = params.classifier_weights;
  if (h.size() != w.cols) throw FormatError("hidden state length does not match the classifier");
  std::vector<double> logits(params.classifier_bias);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) sum += w(r, c) * h[c];
    logits[r] += sum;
  }
  return softmax(logits);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

PredictionMatrix make_prediction(std::vector<std::size_t> frame_indices, std::vector<std::vector<double>> rows) {
  if (rows.empty()) throw InvalidArgument("no key frames to classify");
  PredictionMatrix p;
  p.frame_indices = std::move(frame_indices);
  p.rows = std::move(rows);
  const std::size_t classes = p.rows.front().size();
  p.video_prediction.assign(classes, 0.0);
  for (const auto& r : p.rows) {
    if (r.size() != classes) throw FormatError("prediction rows have different class counts");
    for (std::size_t c = 0; c < classes; ++c) p.video_prediction[c] += r[c];
  }
  for (auto& v : p.video_prediction) v /= static_cast<double>(p.rows.size());
  p.label = argmax(p.video_prediction);
  return p;
}

PredictionMatrix classify_video(const tsdpc::KeyFrameSet& key_frames, const FeatureMatrix& features,
                                const LstmParams& params, ScoringMode mode) {
  if (key_frames.indices.empty()) throw InvalidArgument("key frame set is empty");
  const FeatureMatrix sequence = features.select_rows(key_frames.indices);
  auto hidden = mode == ScoringMode::sequential ? run_sequence(sequence, params) : run_zero_state(sequence, params);
  std::vector<std::vector<double>> rows;
  rows.reserve(hidden.size());
  for (const auto& h : hidden) rows.push_back(predict_frame(h, params));
  return make_prediction(key_frames.indices, std::move(rows));
}

nlohmann::ordered_json to_json(const PredictionMatrix& prediction) {
  nlohmann::ordered_json json;
  json["frame_indices"] = prediction.frame_indices;
  json["rows"] = prediction.rows;
  json["video_prediction"] = prediction.video_prediction;
  json["label"] = prediction.label;
  return json;
}

PredictionMatrix prediction_from_json(const nlohmann::json& json) {
  try {
    std::vector<std::size_t> indices;
    if (json.contains("frame_indices")) indices = json.at("frame_indices").get<std::vector<std::size_t>>();
    // A file with only a video-level vector is treated as a single row.
    auto rows = json.contains("rows") ? json.at("rows").get<std::vector<std::vector<double>>>()
                                      : std::vector<std::vector<double>>{json.at("video_prediction").get<std::vector<double>>()};
    for (const auto& r : rows) check_finite(r, "prediction");
    return make_prediction(std::move(indices), std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed prediction JSON: ") + e.what());
  }
}

LstmParams read_params(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw FormatError("missing LSTM magic");
  const std::uint32_t layers = read_u32(in);
  const std::uint32_t d = read_u32(in);
  const std::uint32_t h = read_u32(in);
  const std::uint32_t c = read_u32(in);
  const std::uint32_t mode = read_u32(in);
  if (layers == 0 || d == 0 || h == 0 || c == 0) throw FormatError("LSTM params header has a zero dimension");
  if (mode > 1) throw FormatError("unknown block input mode " + std::to_string(mode));
  // Guard against absurd headers before allocating.
  constexpr std::uint64_t kMaxValues = std::uint64_t{1} << 30;
  const std::uint64_t per_layer = 4ull * (std::uint64_t{h} * std::max(d, h) + std::uint64_t{h} * h + h);
  if (std::uint64_t{layers} * per_layer + std::uint64_t{c} * h + c > kMaxValues) {
    throw FormatError("LSTM params header declares too many values");
  }
  LstmParams p = LstmParams::zeros(d, h, c, layers, static_cast<BlockInput>(mode));
  for (auto& layer : p.layers) {
    for (Gate* gate : {&layer.block, &layer.input, &layer.forget, &layer.output}) {
      read_values(in, gate->input_weights.data);
      read_values(in, gate->recurrent_weights.data);
      read_values(in, gate->bias);
    }
  }
  read_values(in, p.classifier_weights.data);
  read_values(in, p.classifier_bias);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after LSTM params");
  return p;
}

void write_params(std::ostream& out, const LstmParams& params) {
  params.validate();
  out.write(kMagic.data(), 4);
  write_u32(out, static_cast<std::uint32_t>(params.num_layers()));
  write_u32(out, static_cast<std::uint32_t>(params.input_dim()));
  write_u32(out, static_cast<std::uint32_t>(params.hidden_dim()));
  write_u32(out, static_cast<std::uint32_t>(params.class_count()));
  write_u32(out, static_cast<std::uint32_t>(params.block_input));
  for (const auto& layer : params.layers) {
    for (const Gate* gate : {&layer.block, &layer.input, &layer.forget, &layer.output}) {
      write_values(out, gate->input_weights.data);
      write_values(out, gate->recurrent_weights.data);
      write_values(out, gate->bias);
    }
  }
  write_values(out, params.classifier_weights.data);
  write_values(out, params.classifier_bias);
}

LstmParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_params(in);
}

void save_params(const std::filesystem::path& path, const LstmParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_params(out, params);
}

}  // namespace kfdpc::classify
