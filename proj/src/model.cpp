#include "gaittrack/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gaittrack/blob.hpp"
#include "gaittrack/csv.hpp"

namespace gait::nn {

Eigen::Index apply_scale(Eigen::Index width, ChannelScale scale) {
  require(scale.num > 0 && scale.den > 0, ErrorCode::invalid_params,
          "channel scale must be positive");
  const long long scaled =
      (static_cast<long long>(width) * scale.num + scale.den / 2) / scale.den;
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(scaled));
}

ChannelScale scale_from_string(const std::string& text) {
  ChannelScale s;
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      s.num = std::stoi(text);
      s.den = 1;
    } else {
      s.num = std::stoi(text.substr(0, slash));
      s.den = std::stoi(text.substr(slash + 1));
    }
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_config, "bad channel scale '" + text + "'");
  }
  require(s.num > 0 && s.den > 0, ErrorCode::invalid_config,
          "channel scale must be positive: '" + text + "'");
  return s;
}

std::string to_string(ChannelScale scale) {
  if (scale.den == 1) return std::to_string(scale.num);
  return std::to_string(scale.num) + "/" + std::to_string(scale.den);
}

ModelConfig::Variant variant_from_string(const std::string& s) {
  if (s == "fused") return ModelConfig::Variant::fused;
  if (s == "independent") return ModelConfig::Variant::independent;
  fail(ErrorCode::invalid_config, "unknown variant '" + s + "'");
}

ModelConfig::Depth depth_from_string(const std::string& s) {
  if (s == "conv9") return ModelConfig::Depth::conv9;
  if (s == "conv5") return ModelConfig::Depth::conv5;
  fail(ErrorCode::invalid_config, "unknown depth '" + s + "'");
}

ModelConfig::BnOrder bn_order_from_string(const std::string& s) {
  if (s == "conv_relu_bn") return ModelConfig::BnOrder::conv_relu_bn;
  if (s == "conv_bn_relu") return ModelConfig::BnOrder::conv_bn_relu;
  fail(ErrorCode::invalid_config, "unknown batchnorm order '" + s + "'");
}

ModelConfig::Init init_from_string(const std::string& s) {
  if (s == "normal") return ModelConfig::Init::normal;
  if (s == "he") return ModelConfig::Init::he;
  fail(ErrorCode::invalid_config, "unknown init '" + s + "'");
}

const char* to_string(ModelConfig::Variant v) {
  return v == ModelConfig::Variant::fused ? "fused" : "independent";
}
const char* to_string(ModelConfig::Depth d) {
  return d == ModelConfig::Depth::conv9 ? "conv9" : "conv5";
}
const char* to_string(ModelConfig::BnOrder o) {
  return o == ModelConfig::BnOrder::conv_relu_bn ? "conv_relu_bn" : "conv_bn_relu";
}
const char* to_string(ModelConfig::Init i) {
  return i == ModelConfig::Init::normal ? "normal" : "he";
}

std::vector<Eigen::Index> conv_channels(const ModelConfig& cfg) {
  static const Eigen::Index deep[] = {64, 64, 128, 128, 256, 256, 512, 512, 1024};
  static const Eigen::Index shallow[] = {64, 128, 256, 512, 1024};
  std::vector<Eigen::Index> out;
  if (cfg.depth == ModelConfig::Depth::conv9)
    out.assign(std::begin(deep), std::end(deep));
  else
    out.assign(std::begin(shallow), std::end(shallow));
  for (Eigen::Index& c : out) c = apply_scale(c, cfg.scale);
  return out;
}

std::vector<bool> pool_flags(ModelConfig::Depth depth) {
  if (depth == ModelConfig::Depth::conv9)
    return {false, false, true, true, true, true, true, true, true};
  return {true, true, true, true, true};
}

std::vector<Eigen::Index> dense_widths(const ModelConfig& cfg) {
  std::vector<Eigen::Index> out;
  if (cfg.depth == ModelConfig::Depth::conv9)
    out = {1024, 512};
  else
    out = {512};
  for (Eigen::Index& w : out) w = apply_scale(w, cfg.scale);
  return out;
}

void validate_config(const ModelConfig& cfg) {
  require(cfg.out_len > 0, ErrorCode::invalid_config, "out_len must be positive");
  require(cfg.dropout >= 0.0 && cfg.dropout < 1.0, ErrorCode::invalid_config,
          "dropout must be in [0, 1)");
  require(cfg.init_sigma > 0.0, ErrorCode::invalid_config, "init_sigma must be positive");
  require(cfg.in_rows > 0 && cfg.in_cols > 0, ErrorCode::invalid_config,
          "input shape must be positive");
  int pools = 0;
  for (bool p : pool_flags(cfg.depth)) pools += p ? 1 : 0;
  require((cfg.in_cols >> pools) >= 1, ErrorCode::invalid_config,
          "input too narrow for the pooling chain");
}

std::string config_text(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "variant=" << to_string(cfg.variant) << "\n";
  os << "depth=" << to_string(cfg.depth) << "\n";
  os << "scale=" << to_string(cfg.scale) << "\n";
  os << "out_len=" << cfg.out_len << "\n";
  os << "dropout=" << csv::format(cfg.dropout) << "\n";
  os << "init=" << to_string(cfg.init) << "\n";
  os << "init_sigma=" << csv::format(cfg.init_sigma) << "\n";
  os << "bn_order=" << to_string(cfg.bn_order) << "\n";
  os << "in_rows=" << cfg.in_rows << "\n";
  os << "in_cols=" << cfg.in_cols << "\n";
  os << "seed=" << cfg.seed << "\n";
  return os.str();
}

ModelConfig config_from_text(const std::string& text) {
  ModelConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::invalid_config,
            "model config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "variant") cfg.variant = variant_from_string(value);
    else if (key == "depth") cfg.depth = depth_from_string(value);
    else if (key == "scale") cfg.scale = scale_from_string(value);
    else if (key == "out_len") cfg.out_len = static_cast<int>(csv::parse_int(value, line_no, "model config"));
    else if (key == "dropout") cfg.dropout = csv::parse_double(value, line_no, "model config");
    else if (key == "init") cfg.init = init_from_string(value);
    else if (key == "init_sigma") cfg.init_sigma = csv::parse_double(value, line_no, "model config");
    else if (key == "bn_order") cfg.bn_order = bn_order_from_string(value);
    else if (key == "in_rows") cfg.in_rows = csv::parse_int(value, line_no, "model config");
    else if (key == "in_cols") cfg.in_cols = csv::parse_int(value, line_no, "model config");
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(csv::parse_int(value, line_no, "model config"));
    else fail(ErrorCode::invalid_config, "model config: unknown key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

namespace {

constexpr char kWeightsMagic[4] = {'G', 'T', 'W', '1'};

template <class S>
void write_tensors(const std::string& path, const std::vector<ParamRef<S>>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out.write(kWeightsMagic, 4);
  const std::uint64_t count = tensors.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (const ParamRef<S>& p : tensors) {
    const std::uint32_t len = static_cast<std::uint32_t>(p.name.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(p.name.data(), len);
    blob::write<S>(out, {p.value->rows(), p.value->cols()}, p.value->data());
  }
  if (!out) fail(ErrorCode::io_error, "write failed for " + path);
}

template <class S>
std::map<std::string, blob::Tensor<S>> read_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kWeightsMagic, 4))
    fail(ErrorCode::io_error, path + ": not a weights file");
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 8);
  std::map<std::string, blob::Tensor<S>> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) fail(ErrorCode::io_error, path + ": truncated tensor name");
    out.emplace(name, blob::read<S>(in, path + ":" + name));
  }
  return out;
}

}  // namespace

template <class S>
void save_checkpoint(const std::string& dir, Network<S>& net) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  csv::write_file(dir + "/config.txt", config_text(net.config()));
  std::vector<ParamRef<S>> tensors = net.params();
  std::vector<ParamRef<S>> state = net.state();
  tensors.insert(tensors.end(), state.begin(), state.end());
  write_tensors<S>(dir + "/weights.bin", tensors);
}

template <class S>
Network<S> load_checkpoint(const std::string& dir) {
  const ModelConfig cfg = config_from_text(csv::read_file(dir + "/config.txt"));
  Network<S> net(cfg);
  std::map<std::string, blob::Tensor<S>> tensors = read_tensors<S>(dir + "/weights.bin");
  std::vector<ParamRef<S>> refs = net.params();
  std::vector<ParamRef<S>> state = net.state();
  refs.insert(refs.end(), state.begin(), state.end());
  for (ParamRef<S>& p : refs) {
    const auto it = tensors.find(p.name);
    require(it != tensors.end(), ErrorCode::io_error, dir + ": missing tensor " + p.name);
    const blob::Tensor<S>& t = it->second;
    require(t.dims.size() == 2 && t.dims[0] == p.value->rows() && t.dims[1] == p.value->cols(),
            ErrorCode::shape_mismatch, dir + ": tensor " + p.name + " has wrong shape");
    *p.value = Eigen::Map<const Mat<S>>(t.data.data(), t.dims[0], t.dims[1]);
    tensors.erase(it);
  }
  require(tensors.empty(), ErrorCode::io_error,
          dir + ": unexpected tensor " + (tensors.empty() ? "" : tensors.begin()->first));
  return net;
}

template void save_checkpoint<float>(const std::string&, Network<float>&);
template void save_checkpoint<double>(const std::string&, Network<double>&);
template Network<float> load_checkpoint<float>(const std::string&);
template Network<double> load_checkpoint<double>(const std::string&);

}  // namespace gait::nn
