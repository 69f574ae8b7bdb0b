#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "gazeattn/format.hpp"
#include "gazeattn/toy_model.hpp"

namespace gazeattn {

namespace {

constexpr const char* kMagic = "gazeattn-checkpoint";
constexpr int kVersion = 1;

}  // namespace

void write_loss_trace(std::ostream& out, std::span<const LossRecord> trace) {
  out << "step,total_loss,ce_loss,kl_loss\n";
  for (const auto& r : trace) {
    out << r.step << ',' << format_double(r.total) << ',' << format_double(r.ce) << ',' << format_double(r.kl)
        << '\n';
  }
}

void save_checkpoint(std::ostream& out, const ModelParams& params, AttentionKind kind, std::size_t steps) {
  const ModelShape& s = params.shape;
  out << kMagic << ' ' << kVersion << '\n';
  out << "kind " << to_string(kind) << '\n';
  out << "steps " << steps << '\n';
  out << "shape " << s.rows << ' ' << s.cols << ' ' << s.input_channels << ' ' << s.feature_channels << ' '
      << s.num_classes << ' ' << to_string(s.fusion) << '\n';
  for (const auto& group : kParamGroups) {
    const auto& values = params.*group.member;
    out << "tensor " << group.name << ' ' << values.size() << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << format_double(values[i]);
    out << '\n';
  }
  out << "end\n";
}

Checkpoint load_checkpoint(std::istream& in, const std::string& source) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "unexpected end of checkpoint");
    ++line_no;
    return std::istringstream(line);
  };
  auto fail = [&](const std::string& what) { return ParseError(source, line_no, what); };

  {
    auto ls = next_line();
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != kMagic) throw fail("not a gazeattn checkpoint");
    if (version != kVersion) throw fail("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint cp;
  {
    auto ls = next_line();
    std::string key, name;
    if (!(ls >> key >> name) || key != "kind") throw fail("expected 'kind <baseline>'");
    const auto kind = parse_attention_kind(name);
    if (!kind) throw fail("unknown baseline '" + name + "'");
    cp.kind = *kind;
  }
  {
    auto ls = next_line();
    std::string key;
    if (!(ls >> key >> cp.steps) || key != "steps") throw fail("expected 'steps <n>'");
  }
  ModelShape shape;
  {
    auto ls = next_line();
    std::string key, fusion;
    if (!(ls >> key >> shape.rows >> shape.cols >> shape.input_channels >> shape.feature_channels >>
          shape.num_classes >> fusion) ||
        key != "shape") {
      throw fail("expected 'shape <rows> <cols> <in> <features> <classes> <fusion>'");
    }
    const auto f = parse_fusion(fusion);
    if (!f) throw fail("unknown fusion '" + fusion + "'");
    shape.fusion = *f;
  }
  try {
    cp.params = ModelParams::zeros(shape);
  } catch (const ShapeError& e) {
    throw fail(e.what());
  }
  for (const auto& group : kParamGroups) {
    auto header = next_line();
    std::string key, name;
    std::size_t count = 0;
    if (!(header >> key >> name >> count) || key != "tensor" || name != group.name) {
      throw fail(std::string("expected 'tensor ") + group.name + " <count>'");
    }
    auto& values = cp.params.*group.member;
    if (count != values.size()) {
      throw fail(std::string(group.name) + " has " + std::to_string(count) + " values, shape needs " +
                 std::to_string(values.size()));
    }
    auto body = next_line();
    std::string token;
    for (std::size_t i = 0; i < count; ++i) {
      if (!(body >> token)) throw fail(std::string(group.name) + ": too few values");
      const auto v = parse_double(token);
      if (!v || !std::isfinite(*v)) throw fail(std::string(group.name) + ": bad value '" + token + "'");
      values[i] = *v;
    }
    if (body >> token) throw fail(std::string(group.name) + ": too many values");
  }
  {
    auto ls = next_line();
    std::string key;
    if (!(ls >> key) || key != "end") throw fail("expected 'end'");
  }
  return cp;
}

}  // namespace gazeattn
