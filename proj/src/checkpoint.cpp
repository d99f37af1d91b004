#include "selfalign/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "selfalign/errors.hpp"

namespace selfalign {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'A', 'P', 'E'};
constexpr std::array<char, 4> kOptimizerTag = {'O', 'P', 'T', 'S'};

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const std::vector<double>& vs) {
    for (double v : vs) f64(v);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw IoError(path_, "truncated checkpoint");
  }
  bool tag(const std::array<char, 4>& expected) {
    need(4);
    const bool ok = std::memcmp(data_.data() + pos_, expected.data(), 4) == 0;
    pos_ += 4;
    return ok;
  }
  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  void f64s(std::vector<double>& out) {
    need(out.size() * 8);
    for (double& v : out) v = f64();
  }

 private:
  std::vector<char> data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const EncoderModel& model,
                     const OptimizerState* optimizer) {
  Writer w;
  const auto& c = model.config;
  w.bytes(kMagic.data(), kMagic.size());
  w.uint<std::uint32_t>(kCheckpointVersion);
  w.uint<std::uint32_t>(c.ngram_n);
  w.uint<std::uint64_t>(c.vocab_buckets);
  w.uint<std::uint32_t>(c.embed_dim);
  w.uint<std::uint32_t>(c.max_tokens);
  w.f64(c.init_scale);
  w.uint<std::uint64_t>(c.seed);
  w.f64s(model.embedding_table.values());
  w.f64s(model.proj_weight.values());
  w.f64s(model.proj_bias);
  if (optimizer != nullptr) {
    w.bytes(kOptimizerTag.data(), kOptimizerTag.size());
    w.uint<std::uint64_t>(optimizer->step);
    w.f64s(optimizer->m_embedding.values());
    w.f64s(optimizer->v_embedding.values());
    w.f64s(optimizer->m_weight.values());
    w.f64s(optimizer->v_weight.values());
    w.f64s(optimizer->m_bias);
    w.f64s(optimizer->v_bias);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError(path.string(), "write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open checkpoint");
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());

  if (!r.tag(kMagic)) throw IoError(path.string(), "not a checkpoint (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw IoError(path.string(), "unsupported checkpoint version " + std::to_string(version));

  EncoderConfig c;
  c.ngram_n = r.uint<std::uint32_t>();
  c.vocab_buckets = r.uint<std::uint64_t>();
  c.embed_dim = r.uint<std::uint32_t>();
  c.max_tokens = r.uint<std::uint32_t>();
  c.init_scale = r.f64();
  c.seed = r.uint<std::uint64_t>();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw IoError(path.string(), std::string("corrupt config: ") + e.what());
  }
  const std::size_t d = c.embed_dim;
  if (c.vocab_buckets > r.remaining() / (8 * d)) throw IoError(path.string(), "truncated checkpoint");

  Checkpoint ck{EncoderModel{c, Matrix(c.vocab_buckets, d), Matrix(d, d), std::vector<double>(d)},
                std::nullopt};
  r.f64s(ck.model.embedding_table.values());
  r.f64s(ck.model.proj_weight.values());
  r.f64s(ck.model.proj_bias);

  if (!r.at_end()) {
    if (!r.tag(kOptimizerTag)) throw IoError(path.string(), "unknown trailing section");
    OptimizerState s = init_optimizer_state(ck.model);
    s.step = r.uint<std::uint64_t>();
    r.f64s(s.m_embedding.values());
    r.f64s(s.v_embedding.values());
    r.f64s(s.m_weight.values());
    r.f64s(s.v_weight.values());
    r.f64s(s.m_bias);
    r.f64s(s.v_bias);
    if (!r.at_end()) throw IoError(path.string(), "trailing bytes after optimizer section");
    ck.optimizer = std::move(s);
  }
  return ck;
}

}  // namespace selfalign
