#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sqlgen/grammar.hpp"
#include "sqlgen/lexicon.hpp"
#include "sqlgen/rng.hpp"
#include "sqlgen/vocabulary.hpp"

namespace sqlgen {

struct ModelDims {
  int d_e = 50;        // embedding width
  int d_h = 32;        // encoder hidden width per direction
  int d_s = 64;        // decoder hidden width
  int vocab_size = 0;  // |V|, all four sections
  int sql_size = 0;    // |V_SQL| = keywords + comparators + db symbols

  int unk_id() const { return vocab_size; }
  int bos_id() const { return vocab_size + 1; }
  int embed_rows() const { return vocab_size + 2; }
  int enc_width() const { return 2 * d_h; }

  bool operator==(const ModelDims&) const = default;
};

// One gated recurrent unit: r,z = sigmoid, candidate n = tanh with reset
// applied to the recurrent term, h' = (1-z)*n + z*h.
struct GruParams {
  Eigen::MatrixXd w_r, w_z, w_n;  // hidden x input
  Eigen::MatrixXd u_r, u_z, u_n;  // hidden x hidden
  Eigen::VectorXd b_r, b_z, b_n;  // hidden

  void resize(int input, int hidden);
  void visit(const std::string& prefix,
             const std::function<void(const std::string&,
                                      Eigen::Ref<Eigen::MatrixXd>)>& fn);
};

struct ModelParams {
  ModelDims dims;
  Eigen::MatrixXd embedding;  // embed_rows x d_e
  GruParams enc_fwd, enc_bwd;  // input d_e, hidden d_h
  GruParams dec;               // input d_e + 2*d_h, hidden d_s
  Eigen::MatrixXd w_attn;      // d_s x 2*d_h, bilinear attention scores
  Eigen::MatrixXd w_init;      // d_s x d_h, decoder start from last backward state
  Eigen::VectorXd b_init;      // d_s
  Eigen::MatrixXd w_out;       // sql_size x d_s, generate scores
  Eigen::MatrixXd w_copy;      // 2*d_h x d_s, copy scores

  static ModelParams init(const ModelDims& dims, Rng& rng);   // uniform(-0.08, 0.08)
  static ModelParams zeros(const ModelDims& dims);

  // Visits every tensor in a fixed order with a stable name.
  void for_each(const std::function<void(const std::string&,
                                         Eigen::Ref<Eigen::MatrixXd>)>& fn);
  std::size_t param_count() const;
  bool all_finite() const;
};

// Per-step forward activations of one GRU application.
struct GruTape {
  Eigen::VectorXd x, h_prev, r, z, n, h;
};

Eigen::VectorXd gru_step(const GruParams& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev, GruTape* tape);

// Backward through one GRU step; accumulates parameter gradients into
// `grads` and returns gradients wrt x via `dx` and wrt h_prev (returned).
Eigen::VectorXd gru_backward(const GruParams& p, const GruTape& tape,
                             const Eigen::VectorXd& dh, GruParams& grads,
                             Eigen::VectorXd& dx);

struct EncoderOutput {
  Eigen::MatrixXd states;          // n x 2*d_h, row j = [fwd_j ; bwd_j]
  std::vector<int> ids;            // embedding row per source token
  std::vector<std::string> tokens; // source surfaces
  std::vector<std::string> folded; // folded source texts (word aggregation keys)
  std::vector<GruTape> fwd_tape, bwd_tape;

  int length() const { return static_cast<int>(ids.size()); }
};

EncoderOutput encode(const TokenSeq& source, const Vocabulary& vocab,
                     const ModelParams& params);

// Attention over encoder states conditioned on the previous decoder state.
struct Attention {
  Eigen::VectorXd scores;   // n
  Eigen::VectorXd alpha;    // n, softmax of scores
  Eigen::VectorXd context;  // 2*d_h
};

Attention attend(const Eigen::VectorXd& s_prev, const EncoderOutput& enc,
                 const ModelParams& params);

// The masked generate/copy mixture for one step.
struct StepDistribution {
  int sql_size = 0;
  std::vector<double> entry_probs;  // |V_SQL| + n, exactly 0 on masked entries
  double generate_mass = 0.0;
  double copy_mass = 0.0;

  // Entries that share a folded token text form one word; a word's
  // probability is the sum over its entries. Ordered by first entry index.
  struct Word {
    std::string folded;
    std::string surface;
    double prob = 0.0;
    std::vector<int> entries;
  };
  std::vector<Word> words;

  double total() const { return generate_mass + copy_mass; }
  const Word* find_word(const std::string& folded_text) const;
  int argmax_word() const;  // index into words, first max wins
};

StepDistribution step_distribution(const Eigen::VectorXd& s_t,
                                   const EncoderOutput& enc,
                                   const MaskVector& mask,
                                   const Vocabulary& vocab,
                                   const ModelParams& params);

// Forward activations of one decode step kept for backprop.
struct StepTape {
  int prev_id = 0;               // embedding row fed to the decoder
  Attention attn;
  GruTape gru;
  Eigen::VectorXd s_prev, s_t;
  MaskVector mask;
  StepDistribution dist;
  int chosen_word = -1;          // index into dist.words
  int chosen_entry = -1;         // representative entry (first legal member)
  double logp = 0.0;
  bool explored = false;         // sampled (vs argmax) under epsilon-greedy
  TokenRole role = TokenRole::BWord;
};

struct DecodeTape {
  EncoderOutput enc;
  Eigen::MatrixXd copy_proj;     // n x d_s, sigmoid(states * w_copy)
  Eigen::VectorXd s0;
  std::vector<StepTape> steps;
};

struct Episode {
  std::vector<std::string> tokens;  // emitted surfaces
  std::vector<TokenRole> roles;
  std::vector<double> logps;
  std::vector<std::uint8_t> explored;
  bool truncated = false;   // hit max_len without EOS
  bool dead_end = false;    // mask had no support (loose-mask pathology)
  GrammarState final_state;
  std::shared_ptr<const DecodeTape> tape;

  int length() const { return static_cast<int>(tokens.size()); }
  bool ended() const { return !truncated && !dead_end; }
};

// Epsilon-greedy masked decoding: at each step explore with probability
// epsilon (sample a word from the distribution), otherwise take the argmax
// word. Stops on EOS or after machine.max_len() tokens.
Episode decode_sample(const ModelParams& params, const MaskMachine& machine,
                      EncoderOutput enc, double epsilon, Rng& rng);

// Teacher forcing along `gold` (token texts, EOS last); throws IllegalToken
// where the grammar forbids a gold token. The per-step log-probabilities are
// the word-level masked mixture probabilities.
Episode force_decode(const ModelParams& params, const MaskMachine& machine,
                     EncoderOutput enc, const std::vector<std::string>& gold);

std::vector<double> sequence_logprob(const ModelParams& params,
                                     const MaskMachine& machine,
                                     EncoderOutput enc,
                                     const std::vector<std::string>& gold);

struct LossGrads {
  double loss = 0.0;
  ModelParams grads;
};

// loss = -sum_i R[i] * logp[i]; exact backpropagation through the mixture,
// decoder, attention, copy projection, encoder, and embeddings. Rewards are
// constants.
LossGrads loss_and_gradients(const Episode& episode,
                             const std::vector<double>& rewards,
                             const ModelParams& params);

// Checkpoint: magic + JSON manifest (dims, vocabulary sections and hash,
// config echo) + raw little-endian doubles for every tensor in visit order.
void save_params(const ModelParams& params, const Vocabulary& vocab,
                 const std::string& config_echo,
                 const std::filesystem::path& path);

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
  std::string config_echo;
};

Checkpoint load_params(const std::filesystem::path& path);

}  // namespace sqlgen
