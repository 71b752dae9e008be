#include "sqlgen/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "sqlgen/errors.hpp"
#include "sqlgen/log.hpp"
#include "sqlgen/strings.hpp"

namespace sqlgen {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

Eigen::VectorXd embed_row(const ModelParams& p, int id) {
  return p.embedding.row(id).transpose();
}

int token_embedding_id(const Vocabulary& vocab, const ModelDims& dims,
                       const std::string& token) {
  int id = vocab.lookup(token);
  return id >= 0 ? id : dims.unk_id();
}

}  // namespace

void GruParams::resize(int input, int hidden) {
  w_r.setZero(hidden, input);
  w_z.setZero(hidden, input);
  w_n.setZero(hidden, input);
  u_r.setZero(hidden, hidden);
  u_z.setZero(hidden, hidden);
  u_n.setZero(hidden, hidden);
  b_r.setZero(hidden);
  b_z.setZero(hidden);
  b_n.setZero(hidden);
}

void GruParams::visit(const std::string& prefix,
                      const std::function<void(const std::string&,
                                               Eigen::Ref<Eigen::MatrixXd>)>& fn) {
  fn(prefix + ".w_r", w_r);
  fn(prefix + ".w_z", w_z);
  fn(prefix + ".w_n", w_n);
  fn(prefix + ".u_r", u_r);
  fn(prefix + ".u_z", u_z);
  fn(prefix + ".u_n", u_n);
  fn(prefix + ".b_r", b_r);
  fn(prefix + ".b_z", b_z);
  fn(prefix + ".b_n", b_n);
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  if (dims.vocab_size <= 0 || dims.sql_size <= 0 || dims.d_e <= 0 ||
      dims.d_h <= 0 || dims.d_s <= 0) {
    throw InternalError("model dimensions must be positive");
  }
  ModelParams p;
  p.dims = dims;
  p.embedding.setZero(dims.embed_rows(), dims.d_e);
  p.enc_fwd.resize(dims.d_e, dims.d_h);
  p.enc_bwd.resize(dims.d_e, dims.d_h);
  p.dec.resize(dims.d_e + dims.enc_width(), dims.d_s);
  p.w_attn.setZero(dims.d_s, dims.enc_width());
  p.w_init.setZero(dims.d_s, dims.d_h);
  p.b_init.setZero(dims.d_s);
  p.w_out.setZero(dims.sql_size, dims.d_s);
  p.w_copy.setZero(dims.enc_width(), dims.d_s);
  return p;
}

ModelParams ModelParams::init(const ModelDims& dims, Rng& rng) {
  ModelParams p = zeros(dims);
  p.for_each([&rng](const std::string&, Eigen::Ref<Eigen::MatrixXd> m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m(r, c) = rng.uniform(-0.08, 0.08);
      }
    }
  });
  return p;
}

void ModelParams::for_each(
    const std::function<void(const std::string&,
                             Eigen::Ref<Eigen::MatrixXd>)>& fn) {
  fn("embedding", embedding);
  enc_fwd.visit("enc_fwd", fn);
  enc_bwd.visit("enc_bwd", fn);
  dec.visit("dec", fn);
  fn("w_attn", w_attn);
  fn("w_init", w_init);
  fn("b_init", b_init);
  fn("w_out", w_out);
  fn("w_copy", w_copy);
}

std::size_t ModelParams::param_count() const {
  std::size_t n = 0;
  const_cast<ModelParams*>(this)->for_each(
      [&n](const std::string&, Eigen::Ref<Eigen::MatrixXd> m) {
        n += static_cast<std::size_t>(m.size());
      });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  const_cast<ModelParams*>(this)->for_each(
      [&ok](const std::string&, Eigen::Ref<Eigen::MatrixXd> m) {
        ok = ok && m.allFinite();
      });
  return ok;
}

Eigen::VectorXd gru_step(const GruParams& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev, GruTape* tape) {
  Eigen::VectorXd r = (p.w_r * x + p.u_r * h_prev + p.b_r).unaryExpr(&sigmoid);
  Eigen::VectorXd z = (p.w_z * x + p.u_z * h_prev + p.b_z).unaryExpr(&sigmoid);
  Eigen::VectorXd n = (p.w_n * x + r.cwiseProduct(p.u_n * h_prev) + p.b_n)
                          .array()
                          .tanh()
                          .matrix();
  Eigen::VectorXd h = (Eigen::VectorXd::Ones(z.size()) - z).cwiseProduct(n) +
                      z.cwiseProduct(h_prev);
  if (tape != nullptr) {
    tape->x = x;
    tape->h_prev = h_prev;
    tape->r = r;
    tape->z = z;
    tape->n = n;
    tape->h = h;
  }
  return h;
}

Eigen::VectorXd gru_backward(const GruParams& p, const GruTape& t,
                             const Eigen::VectorXd& dh, GruParams& g,
                             Eigen::VectorXd& dx) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dh.size());
  Eigen::VectorXd dn = dh.cwiseProduct(ones - t.z);
  Eigen::VectorXd dz = dh.cwiseProduct(t.h_prev - t.n);
  Eigen::VectorXd dh_prev = dh.cwiseProduct(t.z);

  // candidate: n = tanh(a_n), a_n = w_n x + r .* (u_n h_prev) + b_n
  Eigen::VectorXd da_n = dn.cwiseProduct(ones - t.n.cwiseProduct(t.n));
  Eigen::VectorXd un_h = p.u_n * t.h_prev;
  Eigen::VectorXd dr = da_n.cwiseProduct(un_h);
  Eigen::VectorXd da_n_r = da_n.cwiseProduct(t.r);
  g.w_n += da_n * t.x.transpose();
  g.u_n += da_n_r * t.h_prev.transpose();
  g.b_n += da_n;
  dx = p.w_n.transpose() * da_n;
  dh_prev += p.u_n.transpose() * da_n_r;

  Eigen::VectorXd da_r = dr.cwiseProduct(t.r).cwiseProduct(ones - t.r);
  g.w_r += da_r * t.x.transpose();
  g.u_r += da_r * t.h_prev.transpose();
  g.b_r += da_r;
  dx += p.w_r.transpose() * da_r;
  dh_prev += p.u_r.transpose() * da_r;

  Eigen::VectorXd da_z = dz.cwiseProduct(t.z).cwiseProduct(ones - t.z);
  g.w_z += da_z * t.x.transpose();
  g.u_z += da_z * t.h_prev.transpose();
  g.b_z += da_z;
  dx += p.w_z.transpose() * da_z;
  dh_prev += p.u_z.transpose() * da_z;

  return dh_prev;
}

EncoderOutput encode(const TokenSeq& source, const Vocabulary& vocab,
                     const ModelParams& params) {
  const int n = static_cast<int>(source.tokens.size());
  if (n == 0) throw InternalError("cannot encode an empty source");
  EncoderOutput out;
  out.ids.reserve(static_cast<std::size_t>(n));
  for (const auto& tok : source.tokens) {
    out.ids.push_back(token_embedding_id(vocab, params.dims, tok));
    out.tokens.push_back(tok);
    out.folded.push_back(fold_case(tok));
  }
  out.fwd_tape.resize(static_cast<std::size_t>(n));
  out.bwd_tape.resize(static_cast<std::size_t>(n));
  out.states.setZero(n, params.dims.enc_width());

  Eigen::VectorXd h = Eigen::VectorXd::Zero(params.dims.d_h);
  for (int t = 0; t < n; ++t) {
    auto ut = static_cast<std::size_t>(t);
    h = gru_step(params.enc_fwd, embed_row(params, out.ids[ut]), h,
                 &out.fwd_tape[ut]);
    out.states.row(t).head(params.dims.d_h) = h.transpose();
  }
  h.setZero();
  for (int t = n - 1; t >= 0; --t) {
    auto ut = static_cast<std::size_t>(t);
    h = gru_step(params.enc_bwd, embed_row(params, out.ids[ut]), h,
                 &out.bwd_tape[ut]);
    out.states.row(t).tail(params.dims.d_h) = h.transpose();
  }
  return out;
}

Attention attend(const Eigen::VectorXd& s_prev, const EncoderOutput& enc,
                 const ModelParams& params) {
  Attention a;
  a.scores = enc.states * (params.w_attn.transpose() * s_prev);
  double mx = a.scores.maxCoeff();
  Eigen::VectorXd ex = (a.scores.array() - mx).exp().matrix();
  a.alpha = ex / ex.sum();
  a.context = enc.states.transpose() * a.alpha;
  return a;
}

const StepDistribution::Word* StepDistribution::find_word(
    const std::string& folded_text) const {
  for (const auto& w : words) {
    if (w.folded == folded_text) return &w;
  }
  return nullptr;
}

int StepDistribution::argmax_word() const {
  int best = -1;
  double best_p = -1.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].prob > best_p) {
      best_p = words[i].prob;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

// The masked generate/copy mixture. Scores are exponentiated against one
// shared normalizer over the legal support; a max-score shift keeps the
// exponentials bounded. Entries sharing a folded token text aggregate into
// one word.
StepDistribution mixture_distribution(const Eigen::VectorXd& s_t,
                                      const EncoderOutput& enc,
                                      const Eigen::MatrixXd& copy_proj,
                                      const MaskVector& mask,
                                      const Vocabulary& vocab,
                                      const ModelParams& params) {
  const int sql_size = mask.sql_size;
  const int total = sql_size + enc.length();
  if (mask.size() != total) {
    throw InternalError("mask length does not match the output space");
  }
  StepDistribution d;
  d.sql_size = sql_size;
  d.entry_probs.assign(static_cast<std::size_t>(total), 0.0);

  std::vector<int> legal;
  std::vector<double> scores;
  for (int e = 0; e < total; ++e) {
    if (!mask.legal(e)) continue;
    legal.push_back(e);
    if (e < sql_size) {
      scores.push_back(params.w_out.row(e).dot(s_t));
    } else {
      scores.push_back(copy_proj.row(e - sql_size).dot(s_t));
    }
  }
  if (legal.empty()) throw DeadEnd("distribution over empty support");

  double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);

  for (std::size_t i = 0; i < legal.size(); ++i) {
    int e = legal[i];
    double p = std::exp(scores[i] - mx) / z;
    d.entry_probs[static_cast<std::size_t>(e)] = p;
    if (e < sql_size) {
      d.generate_mass += p;
    } else {
      d.copy_mass += p;
    }
    const std::string* surface;
    std::string folded;
    if (e < sql_size) {
      surface = &vocab.token_of(e);
      folded = fold_case(*surface);
    } else {
      auto j = static_cast<std::size_t>(e - sql_size);
      surface = &enc.tokens[j];
      folded = enc.folded[j];
    }
    StepDistribution::Word* w = nullptr;
    for (auto& cand : d.words) {
      if (cand.folded == folded) {
        w = &cand;
        break;
      }
    }
    if (w == nullptr) {
      d.words.push_back({folded, *surface, 0.0, {}});
      w = &d.words.back();
    }
    w->prob += p;
    w->entries.push_back(e);
  }
  return d;
}

Eigen::MatrixXd copy_projection(const EncoderOutput& enc,
                                const ModelParams& params) {
  return (enc.states * params.w_copy).unaryExpr(&sigmoid);
}

}  // namespace

StepDistribution step_distribution(const Eigen::VectorXd& s_t,
                                   const EncoderOutput& enc,
                                   const MaskVector& mask,
                                   const Vocabulary& vocab,
                                   const ModelParams& params) {
  return mixture_distribution(s_t, enc, copy_projection(enc, params), mask,
                              vocab, params);
}

namespace {

// Picks the word index for one step; sets `explored` when it sampled.
using WordChooser =
    std::function<int(int step, const StepDistribution&, bool& explored)>;

Episode run_decoder(const ModelParams& params, const MaskMachine& machine,
                    EncoderOutput enc_in, const WordChooser& choose) {
  auto tape = std::make_shared<DecodeTape>();
  tape->enc = std::move(enc_in);
  const EncoderOutput& enc = tape->enc;
  const Vocabulary& vocab = machine.vocab();
  tape->copy_proj = copy_projection(enc, params);
  tape->s0 = params.w_init * enc.bwd_tape[0].h + params.b_init;

  Episode ep;
  GrammarState state = machine.initial_state();
  Eigen::VectorXd s_prev = tape->s0;
  int prev_id = params.dims.bos_id();

  while (!state.done()) {
    if (state.tokens_emitted >= machine.max_len()) {
      ep.truncated = true;
      break;
    }
    MaskVector mask;
    try {
      mask = machine.legal_mask(state);
    } catch (const DeadEnd&) {
      ep.dead_end = true;
      break;
    }

    StepTape st;
    st.prev_id = prev_id;
    st.s_prev = s_prev;
    st.attn = attend(s_prev, enc, params);
    Eigen::VectorXd u(params.dims.d_e + params.dims.enc_width());
    u << embed_row(params, prev_id), st.attn.context;
    st.s_t = gru_step(params.dec, u, s_prev, &st.gru);
    st.mask = std::move(mask);
    st.dist = mixture_distribution(st.s_t, enc, tape->copy_proj, st.mask,
                                   vocab, params);

    bool explored = false;
    int wi = choose(static_cast<int>(tape->steps.size()), st.dist, explored);
    const StepDistribution::Word& word =
        st.dist.words[static_cast<std::size_t>(wi)];
    int entry = word.entries.front();
    st.chosen_word = wi;
    st.chosen_entry = entry;
    st.logp = std::log(word.prob);
    st.explored = explored;
    st.role = machine.role_of(state, entry);

    ep.tokens.push_back(word.surface);
    ep.roles.push_back(st.role);
    ep.logps.push_back(st.logp);
    ep.explored.push_back(explored ? 1 : 0);

    state = machine.advance(state, entry);
    prev_id = token_embedding_id(vocab, params.dims, word.surface);
    s_prev = st.s_t;
    tape->steps.push_back(std::move(st));
  }

  ep.final_state = std::move(state);
  ep.tape = std::move(tape);
  return ep;
}

}  // namespace

Episode decode_sample(const ModelParams& params, const MaskMachine& machine,
                      EncoderOutput enc, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw InternalError("epsilon must lie in [0, 1]");
  }
  return run_decoder(
      params, machine, std::move(enc),
      [&](int, const StepDistribution& dist, bool& explored) {
        explored = rng.uniform01() < epsilon;
        if (explored) {
          std::vector<double> probs;
          probs.reserve(dist.words.size());
          for (const auto& w : dist.words) probs.push_back(w.prob);
          return static_cast<int>(rng.categorical(probs));
        }
        return dist.argmax_word();
      });
}

Episode force_decode(const ModelParams& params, const MaskMachine& machine,
                     EncoderOutput enc, const std::vector<std::string>& gold) {
  std::size_t cursor = 0;
  Episode ep = run_decoder(
      params, machine, std::move(enc),
      [&](int step, const StepDistribution& dist, bool&) -> int {
        if (cursor >= gold.size()) {
          throw IllegalToken("gold sequence ends before EOS at step " +
                             std::to_string(step));
        }
        const std::string& tok = gold[cursor++];
        const StepDistribution::Word* w = dist.find_word(fold_case(tok));
        if (w == nullptr) {
          throw IllegalToken("gold token '" + tok + "' illegal at step " +
                             std::to_string(step));
        }
        return static_cast<int>(w - dist.words.data());
      });
  if (!ep.ended()) {
    throw IllegalToken("gold sequence does not reach EOS within max_len");
  }
  if (cursor != gold.size()) {
    throw IllegalToken("gold tokens remain after EOS");
  }
  return ep;
}

std::vector<double> sequence_logprob(const ModelParams& params,
                                     const MaskMachine& machine,
                                     EncoderOutput enc,
                                     const std::vector<std::string>& gold) {
  return force_decode(params, machine, std::move(enc), gold).logps;
}

LossGrads loss_and_gradients(const Episode& episode,
                             const std::vector<double>& rewards,
                             const ModelParams& params) {
  if (episode.tape == nullptr) throw InternalError("episode carries no tape");
  const DecodeTape& tape = *episode.tape;
  const EncoderOutput& enc = tape.enc;
  const ModelDims& dims = params.dims;
  if (rewards.size() != tape.steps.size()) {
    throw InternalError("reward vector length does not match the episode");
  }

  LossGrads out;
  out.grads = ModelParams::zeros(dims);
  ModelParams& g = out.grads;

  const int n = enc.length();
  Eigen::MatrixXd d_proj = Eigen::MatrixXd::Zero(n, dims.d_s);
  Eigen::MatrixXd d_states = Eigen::MatrixXd::Zero(n, dims.enc_width());
  Eigen::VectorXd ds_next = Eigen::VectorXd::Zero(dims.d_s);

  for (int t = static_cast<int>(tape.steps.size()) - 1; t >= 0; --t) {
    const StepTape& st = tape.steps[static_cast<std::size_t>(t)];
    const double reward = rewards[static_cast<std::size_t>(t)];
    out.loss -= reward * st.logp;

    Eigen::VectorXd ds = ds_next;

    if (reward != 0.0) {
      // d(log p_word)/d(score_e) = [e in word]*p_e/p_w - p_e on the legal
      // support; scaled by dL/d(log p_word) = -reward.
      const StepDistribution::Word& word =
          st.dist.words[static_cast<std::size_t>(st.chosen_word)];
      std::vector<char> member(st.dist.entry_probs.size(), 0);
      for (int e : word.entries) member[static_cast<std::size_t>(e)] = 1;
      for (std::size_t e = 0; e < st.dist.entry_probs.size(); ++e) {
        double pe = st.dist.entry_probs[e];
        if (pe == 0.0) continue;
        double dlogp = (member[e] != 0 ? pe / word.prob : 0.0) - pe;
        double dscore = -reward * dlogp;
        int ei = static_cast<int>(e);
        if (ei < st.dist.sql_size) {
          g.w_out.row(ei) += dscore * st.s_t.transpose();
          ds += dscore * params.w_out.row(ei).transpose();
        } else {
          int j = ei - st.dist.sql_size;
          d_proj.row(j) += dscore * st.s_t.transpose();
          ds += dscore * tape.copy_proj.row(j).transpose();
        }
      }
    }

    Eigen::VectorXd du;
    Eigen::VectorXd ds_prev = gru_backward(params.dec, st.gru, ds, g.dec, du);

    g.embedding.row(st.prev_id) += du.head(dims.d_e).transpose();
    Eigen::VectorXd dc = du.tail(dims.enc_width());

    // attention: c = states^T alpha, alpha = softmax(states W_a^T s_prev)
    Eigen::VectorXd dalpha = enc.states * dc;
    double mix = st.attn.alpha.dot(dalpha);
    Eigen::VectorXd dscore_att =
        st.attn.alpha.cwiseProduct(dalpha - Eigen::VectorXd::Constant(n, mix));
    Eigen::VectorXd v = enc.states.transpose() * dscore_att;
    g.w_attn += st.s_prev * v.transpose();
    ds_prev += params.w_attn * v;
    Eigen::VectorXd wts = params.w_attn.transpose() * st.s_prev;
    d_states += dscore_att * wts.transpose();
    d_states += st.attn.alpha * dc.transpose();

    ds_next = std::move(ds_prev);
  }

  // decoder start: s0 = w_init * h_bwd(first position) + b_init
  g.w_init += ds_next * enc.bwd_tape[0].h.transpose();
  g.b_init += ds_next;
  d_states.row(0).tail(dims.d_h) +=
      (params.w_init.transpose() * ds_next).transpose();

  // copy projection: proj = sigmoid(states * w_copy)
  Eigen::MatrixXd da =
      d_proj.cwiseProduct(tape.copy_proj)
          .cwiseProduct(Eigen::MatrixXd::Ones(n, dims.d_s) - tape.copy_proj);
  g.w_copy += enc.states.transpose() * da;
  d_states += da * params.w_copy.transpose();

  Eigen::VectorXd carry = Eigen::VectorXd::Zero(dims.d_h);
  Eigen::VectorXd dx;
  for (int t = n - 1; t >= 0; --t) {
    auto ut = static_cast<std::size_t>(t);
    Eigen::VectorXd dh = d_states.row(t).head(dims.d_h).transpose() + carry;
    carry = gru_backward(params.enc_fwd, enc.fwd_tape[ut], dh, g.enc_fwd, dx);
    g.embedding.row(enc.ids[ut]) += dx.transpose();
  }
  carry.setZero();
  for (int t = 0; t < n; ++t) {
    auto ut = static_cast<std::size_t>(t);
    Eigen::VectorXd dh = d_states.row(t).tail(dims.d_h).transpose() + carry;
    carry = gru_backward(params.enc_bwd, enc.bwd_tape[ut], dh, g.enc_bwd, dx);
    g.embedding.row(enc.ids[ut]) += dx.transpose();
  }

  return out;
}

namespace {

constexpr char kMagic[] = "SQLGENCKPT1\n";

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  }
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void save_params(const ModelParams& params, const Vocabulary& vocab,
                 const std::string& config_echo,
                 const std::filesystem::path& path) {
  if (params.dims.vocab_size != vocab.size() ||
      params.dims.sql_size != vocab.sql_size()) {
    throw CheckpointError("model dimensions disagree with the vocabulary");
  }
  ModelParams copy = params;

  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["dims"] = {{"d_e", params.dims.d_e},
                      {"d_h", params.dims.d_h},
                      {"d_s", params.dims.d_s},
                      {"vocab_size", params.dims.vocab_size},
                      {"sql_size", params.dims.sql_size}};
  manifest["vocab"] = {{"v_key", vocab.section(TokenClass::Keyword)},
                       {"v_cmp", vocab.section(TokenClass::Comparator)},
                       {"v_db", vocab.section(TokenClass::DbSymbol)},
                       {"v_nl", vocab.section(TokenClass::Word)},
                       {"hash", hash_hex(vocab.hash())}};
  manifest["config"] = config_echo;
  nlohmann::json tensors = nlohmann::json::array();
  copy.for_each([&tensors](const std::string& name,
                           Eigen::Ref<Eigen::MatrixXd> m) {
    tensors.push_back({{"name", name},
                       {"rows", static_cast<std::int64_t>(m.rows())},
                       {"cols", static_cast<std::int64_t>(m.cols())}});
  });
  manifest["tensors"] = tensors;

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw CheckpointError("cannot open checkpoint '" + path.string() +
                          "' for writing");
  }
  os.write(kMagic, sizeof(kMagic) - 1);
  std::string mjson = manifest.dump();
  write_u64(os, mjson.size());
  os.write(mjson.data(), static_cast<std::streamsize>(mjson.size()));
  copy.for_each([&os](const std::string&, Eigen::Ref<Eigen::MatrixXd> m) {
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) *
                                          static_cast<std::size_t>(m.size())));
  });
  os.flush();
  if (!os) {
    throw CheckpointError("write failed for checkpoint '" + path.string() + "'");
  }
}

Checkpoint load_params(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  }
  char magic[sizeof(kMagic) - 1];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw CheckpointError("'" + path.string() + "' is not a checkpoint file");
  }
  std::uint64_t mlen = read_u64(is);
  if (!is || mlen == 0 || mlen > (1u << 26)) {
    throw CheckpointError("corrupt checkpoint manifest length");
  }
  std::string mjson(mlen, '\0');
  is.read(mjson.data(), static_cast<std::streamsize>(mlen));
  if (!is) throw CheckpointError("truncated checkpoint manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mjson);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint manifest: ") + e.what());
  }

  Checkpoint ck;
  try {
    const auto& jd = manifest.at("dims");
    ck.params = ModelParams::zeros(
        ModelDims{jd.at("d_e").get<int>(), jd.at("d_h").get<int>(),
                  jd.at("d_s").get<int>(), jd.at("vocab_size").get<int>(),
                  jd.at("sql_size").get<int>()});
    const auto& jv = manifest.at("vocab");
    ck.vocab = Vocabulary::from_sections(
        jv.at("v_key").get<std::vector<std::string>>(),
        jv.at("v_cmp").get<std::vector<std::string>>(),
        jv.at("v_db").get<std::vector<std::string>>(),
        jv.at("v_nl").get<std::vector<std::string>>());
    if (hash_hex(ck.vocab.hash()) != jv.at("hash").get<std::string>()) {
      throw CheckpointError(
          "vocabulary hash mismatch: checkpoint was built for a different "
          "schema or dataset");
    }
    ck.config_echo = manifest.value("config", "");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint manifest: ") + e.what());
  }
  if (ck.params.dims.vocab_size != ck.vocab.size() ||
      ck.params.dims.sql_size != ck.vocab.sql_size()) {
    throw CheckpointError("checkpoint dimensions disagree with its vocabulary");
  }

  if (!manifest.contains("tensors") || !manifest["tensors"].is_array()) {
    throw CheckpointError("checkpoint manifest lists no tensors");
  }
  const auto& jt = manifest["tensors"];
  std::size_t idx = 0;
  bool ok = true;
  std::string fail;
  ck.params.for_each([&](const std::string& name,
                         Eigen::Ref<Eigen::MatrixXd> m) {
    if (!ok) return;
    if (idx >= jt.size()) {
      ok = false;
      fail = "tensor list too short";
      return;
    }
    const auto& entry = jt[idx++];
    if (!entry.is_object() || entry.value("name", "") != name ||
        entry.value("rows", std::int64_t{-1}) != m.rows() ||
        entry.value("cols", std::int64_t{-1}) != m.cols()) {
      ok = false;
      fail = "tensor '" + name + "' has unexpected shape or order";
      return;
    }
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         static_cast<std::size_t>(m.size())));
    if (!is) {
      ok = false;
      fail = "truncated tensor data for '" + name + "'";
    }
  });
  if (ok && idx != jt.size()) {
    ok = false;
    fail = "tensor list too long";
  }
  if (!ok) throw CheckpointError("corrupt checkpoint: " + fail);
  if (!ck.params.all_finite()) {
    throw CheckpointError("checkpoint contains non-finite parameters");
  }
  return ck;
}

}  // namespace sqlgen
