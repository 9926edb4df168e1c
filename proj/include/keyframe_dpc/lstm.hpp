#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "keyframe_dpc/feature_matrix.hpp"
#include "keyframe_dpc/tsdpc.hpp"

namespace kfdpc::classify {

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  static Matrix zeros(std::size_t rows, std::size_t cols) {
    return {rows, cols, std::vector<double>(rows * cols, 0.0)};
  }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Squashing applied to the block input g_t. `sigmoid` squashes g_t like the
/// other gates; `tanh` is the conventional LSTM cell.
enum class BlockInput : std::uint32_t { sigmoid = 0, tanh = 1 };

/// One gate: pre-activation W_x x + W_h h + b.
struct Gate {
  Matrix input_weights;      // H x input_dim
  Matrix recurrent_weights;  // H x H
  std::vector<double> bias;  // H
};

struct LstmLayer {
  Gate block;   // g
  Gate input;   // i
  Gate forget;  // f
  Gate output;  // o

  std::size_t input_dim() const { return block.input_weights.cols; }
  std::size_t hidden_dim() const { return block.input_weights.rows; }
};

struct LstmParams {
  BlockInput block_input = BlockInput::sigmoid;
  std::vector<LstmLayer> layers;  // layer 0 consumes features, later layers consume h
  Matrix classifier_weights;      // C x H
  std::vector<double> classifier_bias;  // C

  std::size_t num_layers() const { return layers.size(); }
  std::size_t input_dim() const { return layers.front().input_dim(); }
  std::size_t hidden_dim() const { return layers.front().hidden_dim(); }
  std::size_t class_count() const { return classifier_bias.size(); }

  /// Throws FormatError on inconsistent shapes or non-finite values.
  void validate() const;

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim,
                          std::size_t class_count, std::size_t num_layers = 3,
                          BlockInput block_input = BlockInput::sigmoid);

  /// Every weight and bias drawn from uniform(-0.1, 0.1) with a seeded
  /// mt19937_64.
  static LstmParams random(std::size_t input_dim, std::size_t hidden_dim,
                           std::size_t class_count, std::size_t num_layers, std::uint64_t seed,
                           BlockInput block_input = BlockInput::sigmoid);
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zeros(std::size_t hidden_dim) {
    return {std::vector<double>(hidden_dim, 0.0), std::vector<double>(hidden_dim, 0.0)};
  }
};

/// Gate activations of one step, kept for inspection.
struct GateValues {
  std::vector<double> g, i, f, o;
};

double sigmoid(double x);

/// c_t = i ⊙ g + f ⊙ c_prev, h_t = o ⊙ tanh(c_t).
LstmState lstm_step(std::span<const double> x, const LstmState& prev, const LstmLayer& layer,
                    BlockInput block_input, GateValues* gates = nullptr);

/// Stacked cells from zero h and c. Returns the top layer's h_t for every row.
std::vector<std::vector<double>> run_sequence(const FeatureMatrix& sequence,
                                              const LstmParams& params);

/// Every row scored independently from zero state.
std::vector<std::vector<double>> run_zero_state(const FeatureMatrix& sequence,
                                                const LstmParams& params);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// softmax(W_out h + b_out).
std::vector<double> predict_frame(std::span<const double> h, const LstmParams& params);

/// Lowest index wins ties.
std::size_t argmax(std::span<const double> values);

struct PredictionMatrix {
  std::vector<std::size_t> frame_indices;      // key frame each row belongs to
  std::vector<std::vector<double>> rows;       // P_f per key frame
  std::vector<double> video_prediction;        // R_V, the mean of rows
  std::size_t label = 0;
};

enum class ScoringMode {
  sequential,  // hidden state carries across key frames
  zero_state,  // each key frame scored from zero state
};

PredictionMatrix classify_video(const tsdpc::KeyFrameSet& key_frames,
                                const FeatureMatrix& features, const LstmParams& params,
                                ScoringMode mode = ScoringMode::sequential);

/// Mean of rows plus argmax label.
PredictionMatrix make_prediction(std::vector<std::size_t> frame_indices,
                                 std::vector<std::vector<double>> rows);

nlohmann::ordered_json to_json(const PredictionMatrix& prediction);
PredictionMatrix prediction_from_json(const nlohmann::json& json);

// Params file: "LSTM", u32 LE num_layers, D, H, C, block_input mode, then
// per layer W_xc, W_hc, b_c, W_xi, W_hi, b_i, W_xf, W_hf, b_f, W_xo, W_ho, b_o,
// then W_out, b_out; all f32 LE row-major. Layers after the first take H inputs.
LstmParams read_params(std::istream& in);
void write_params(std::ostream& out, const LstmParams& params);
LstmParams load_params(const std::filesystem::path& path);
void save_params(const std::filesystem::path& path, const LstmParams& params);

}  // namespace kfdpc::classify
