#include "flowsteer/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <string_view>

#include "flowsteer/error.hpp"
#include "format.hpp"

namespace flowsteer {
namespace {

void write_values(std::ostream& out, std::string_view tag, const double* values, std::size_t count) {
  std::string line(tag);
  for (std::size_t i = 0; i < count; ++i) {
    line += ' ';
    detail::append_double(line, values[i]);
  }
  line += '\n';
  out << line;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw ConfigError("checkpoint: unexpected end of file");
    return w;
  }
  void expect(std::string_view tag) {
    const auto w = word();
    if (w != tag) throw ConfigError("checkpoint: expected '" + std::string(tag) + "', found '" + w + "'");
  }
  std::size_t count() {
    const auto w = word();
    std::size_t v = 0;
    auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size())
      throw ConfigError("checkpoint: expected an integer, found '" + w + "'");
    return v;
  }
  double number() { return detail::parse_double(word(), "checkpoint"); }
  /// Rest of the current line, split on whitespace.
  std::vector<std::string> line_words() {
    std::string line;
    std::getline(in_, line);
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const VelocityModel& model) {
  const auto& spec = model.spec();
  out << "flowsteer-checkpoint " << kCheckpointVersion << '\n';
  out << "schedule " << to_string(spec.schedule) << '\n';
  out << "dim " << spec.dim << '\n';
  out << "hidden";
  for (auto w : spec.hidden) out << ' ' << w;
  out << '\n';
  out << "activation " << to_string(spec.activation) << '\n';
  out << "score_head " << (spec.score_head ? 1 : 0) << '\n';
  const auto params = model.parameters();
  const auto& shapes = model.layer_shapes();
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& s = shapes[l];
    out << "layer " << l << ' ' << s.in << ' ' << s.out << '\n';
    write_values(out, "weights", params.data() + s.weight_offset, s.in * s.out);
    write_values(out, "bias", params.data() + s.bias_offset, s.out);
  }
  out << "end\n";
}

void save_checkpoint(const std::string& path, const VelocityModel& model) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, model);
  if (!out) throw ConfigError("failed while writing checkpoint '" + path + "'");
}

VelocityModel read_checkpoint(std::istream& in) {
  Reader r(in);
  r.expect("flowsteer-checkpoint");
  const auto version = r.count();
  if (version != static_cast<std::size_t>(kCheckpointVersion))
    throw ConfigError("checkpoint: unsupported format version " + std::to_string(version));
  ModelSpec spec;
  r.expect("schedule");
  spec.schedule = parse_schedule_kind(r.word());
  r.expect("dim");
  spec.dim = r.count();
  r.expect("hidden");
  spec.hidden.clear();
  for (const auto& w : r.line_words()) {
    std::size_t v = 0;
    auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size() || v == 0)
      throw ConfigError("checkpoint: bad hidden width '" + w + "'");
    spec.hidden.push_back(v);
  }
  r.expect("activation");
  spec.activation = parse_activation(r.word());
  r.expect("score_head");
  const auto flag = r.count();
  if (flag > 1) throw ConfigError("checkpoint: score_head must be 0 or 1");
  spec.score_head = flag == 1;
  if (spec.dim == 0) throw ConfigError("checkpoint: dimension must be positive");

  // Build the layout from the header, then check each layer record against it.
  VelocityModel model(spec, std::vector<double>(VelocityModel::parameter_count(spec), 0.0));
  auto params = model.parameters();
  const auto& shapes = model.layer_shapes();
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& s = shapes[l];
    r.expect("layer");
    if (r.count() != l || r.count() != s.in || r.count() != s.out)
      throw ConfigError("checkpoint: layer " + std::to_string(l) + " header does not match the architecture");
    r.expect("weights");
    for (std::size_t i = 0; i < s.in * s.out; ++i) params[s.weight_offset + i] = r.number();
    r.expect("bias");
    for (std::size_t i = 0; i < s.out; ++i) params[s.bias_offset + i] = r.number();
  }
  r.expect("end");
  return model;
}

VelocityModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace flowsteer
