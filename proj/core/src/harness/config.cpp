#include "sfd/harness/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sfd/error.hpp"

namespace sfd::harness {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

DatasetKind parse_kind(const std::string& s) {
  if (s == "synthetic") return DatasetKind::synthetic;
  if (s == "cifar") return DatasetKind::cifar;
  if (s == "image_dir") return DatasetKind::image_dir;
  throw ConfigError("unknown dataset kind '" + s + "' (expected synthetic, cifar or image_dir)");
}

DatasetSpec parse_dataset(const json& j, DatasetSpec spec, const std::string& where) {
  check_keys(j, {"kind", "name", "path", "resolution", "channels", "synthetic"}, where);
  if (j.contains("kind")) {
    std::string kind;
    read(j, "kind", kind, where);
    spec.kind = parse_kind(kind);
  }
  read(j, "name", spec.name, where);
  std::string path = spec.path.string();
  read(j, "path", path, where);
  spec.path = path;
  read(j, "resolution", spec.resolution, where);
  read(j, "channels", spec.channels, where);
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    const std::string w = where + ".synthetic";
    check_keys(s, {"classes", "per_class", "size", "channels", "seed", "noise"}, w);
    read(s, "classes", spec.synthetic.classes, w);
    read(s, "per_class", spec.synthetic.per_class, w);
    read(s, "size", spec.synthetic.size, w);
    read(s, "channels", spec.synthetic.channels, w);
    read(s, "seed", spec.synthetic.seed, w);
    read(s, "noise", spec.synthetic.noise, w);
  }
  return spec;
}

json dataset_json(const DatasetSpec& d) {
  return {{"kind", to_string(d.kind)},
          {"name", d.name},
          {"path", d.path.string()},
          {"resolution", d.resolution},
          {"channels", d.channels},
          {"synthetic",
           {{"classes", d.synthetic.classes},
            {"per_class", d.synthetic.per_class},
            {"size", d.synthetic.size},
            {"channels", d.synthetic.channels},
            {"seed", d.synthetic.seed},
            {"noise", d.synthetic.noise}}}};
}

std::size_t dataset_channels(const DatasetSpec& d) {
  switch (d.kind) {
    case DatasetKind::synthetic: return d.synthetic.channels;
    case DatasetKind::cifar: return 3;
    case DatasetKind::image_dir: return d.channels;
  }
  return d.channels;
}

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::synthetic: return "synthetic";
    case DatasetKind::cifar: return "cifar";
    case DatasetKind::image_dir: return "image_dir";
  }
  return "unknown";
}

continual::TrainingConfig ExperimentConfig::default_training() {
  continual::TrainingConfig t;
  t.pretrain_epochs = 10;
  return t;
}

DatasetSpec ExperimentConfig::default_corpus() {
  DatasetSpec d;
  d.name = "synthetic-pretrain";
  d.synthetic.classes = 40;
  d.synthetic.seed = 1000;
  return d;
}

continual::MethodConfig ExperimentConfig::method_config(continual::Method m) const {
  continual::MethodConfig c;
  c.method = m;
  c.margin = margin;
  c.sdc_bandwidth = sdc_bandwidth;
  switch (m) {
    case continual::Method::LWF: c.gamma = lwf_gamma; break;
    case continual::Method::EWC: c.gamma = ewc_gamma; break;
    case continual::Method::MAS: c.gamma = mas_gamma; break;
    default: break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (task_count == 0 || classes_per_task == 0) throw ConfigError("task_count and classes_per_task must be positive");
  if (dataset.kind == DatasetKind::synthetic && task_count * classes_per_task > dataset.synthetic.classes) {
    throw ConfigError("task_count x classes_per_task exceeds the synthetic class count");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (dataset.resolution != model.backbone.input_resolution) {
    throw ConfigError("dataset.resolution must equal the backbone input resolution");
  }
  if (dataset_channels(dataset) != model.backbone.input_channels) {
    throw ConfigError("dataset channels must equal the backbone input channels");
  }
  if (training.pretrain_epochs > 0 && dataset_channels(pretrain_corpus) != model.backbone.input_channels) {
    throw ConfigError("pretraining corpus channels must equal the backbone input channels");
  }
  if (dataset.kind != DatasetKind::synthetic && dataset.path.empty()) throw ConfigError("dataset.path is required");
  for (auto m : methods) method_config(m).validate();
  model.validate();
  training.validate();
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"dataset", "tasks", "methods", "seeds", "training", "pretraining", "model", "regularizers",
                 "output_dir"},
             "config");
  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset = parse_dataset(j.at("dataset"), c.dataset, "dataset");
  if (j.contains("tasks")) {
    const auto& t = j.at("tasks");
    check_keys(t, {"count", "classes_per_task", "test_fraction"}, "tasks");
    read(t, "count", c.task_count, "tasks");
    read(t, "classes_per_task", c.classes_per_task, "tasks");
    read(t, "test_fraction", c.test_fraction, "tasks");
  }
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read(j, "methods", names, "config");
    c.methods.clear();
    for (const auto& n : names) {
      auto m = continual::parse_method(n);
      if (!m) throw ConfigError("unknown method '" + n + "'");
      c.methods.push_back(*m);
    }
  }
  read(j, "seeds", c.seeds, "config");
  if (j.contains("training")) {
    const auto& t = j.at("training");
    check_keys(t, {"epochs", "batch_size", "learning_rate", "translator_epochs", "translator_learning_rate",
                   "eval_batch_size", "crop_padding", "horizontal_flip"},
               "training");
    read(t, "epochs", c.training.epochs, "training");
    read(t, "batch_size", c.training.batch_size, "training");
    read(t, "learning_rate", c.training.learning_rate, "training");
    read(t, "translator_epochs", c.training.translator_epochs, "training");
    read(t, "translator_learning_rate", c.training.translator_learning_rate, "training");
    read(t, "eval_batch_size", c.training.eval_batch_size, "training");
    read(t, "crop_padding", c.training.augmentation.crop_padding, "training");
    read(t, "horizontal_flip", c.training.augmentation.horizontal_flip, "training");
  }
  if (j.contains("pretraining")) {
    const auto& p = j.at("pretraining");
    check_keys(p, {"epochs", "learning_rate", "corpus"}, "pretraining");
    read(p, "epochs", c.training.pretrain_epochs, "pretraining");
    read(p, "learning_rate", c.training.pretrain_learning_rate, "pretraining");
    if (p.contains("corpus")) c.pretrain_corpus = parse_dataset(p.at("corpus"), c.pretrain_corpus, "pretraining.corpus");
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"stage_channels", "embedding_dim", "attention_reduction", "fca_frequency_groups",
                   "share_alignment", "frequency_cutoff", "alignment_feature_gradient", "cada"},
               "model");
    auto& b = c.model.backbone;
    if (m.contains("stage_channels")) {
      std::vector<std::size_t> stages;
      read(m, "stage_channels", stages, "model");
      if (stages.size() != 4) throw ConfigError("model.stage_channels needs exactly 4 entries");
      std::copy(stages.begin(), stages.end(), b.stage_channels.begin());
    }
    read(m, "embedding_dim", b.embedding_dim, "model");
    read(m, "attention_reduction", c.model.attention_reduction, "model");
    read(m, "fca_frequency_groups", c.model.fca_frequency_groups, "model");
    read(m, "share_alignment", c.model.share_alignment, "model");
    read(m, "alignment_feature_gradient", c.model.alignment_feature_gradient, "model");
    if (m.contains("frequency_cutoff") && !m.at("frequency_cutoff").is_null()) {
      std::size_t cutoff = 0;
      read(m, "frequency_cutoff", cutoff, "model");
      c.model.frequency_cutoff = cutoff;
    }
    if (m.contains("cada")) {
      const auto& k = m.at("cada");
      check_keys(k, {"epsilon", "alpha", "beta", "latent_dim", "hidden_dim", "sigma_floor"}, "model.cada");
      read(k, "epsilon", c.model.cada.epsilon, "model.cada");
      read(k, "alpha", c.model.cada.alpha, "model.cada");
      read(k, "beta", c.model.cada.beta, "model.cada");
      read(k, "latent_dim", c.model.cada.latent_dim, "model.cada");
      read(k, "hidden_dim", c.model.cada.hidden_dim, "model.cada");
      read(k, "sigma_floor", c.model.cada.sigma_floor, "model.cada");
    }
  }
  if (j.contains("regularizers")) {
    const auto& r = j.at("regularizers");
    check_keys(r, {"lwf_gamma", "ewc_gamma", "mas_gamma", "margin", "sdc_bandwidth"}, "regularizers");
    read(r, "lwf_gamma", c.lwf_gamma, "regularizers");
    read(r, "ewc_gamma", c.ewc_gamma, "regularizers");
    read(r, "mas_gamma", c.mas_gamma, "regularizers");
    read(r, "margin", c.margin, "regularizers");
    read(r, "sdc_bandwidth", c.sdc_bandwidth, "regularizers");
  }
  std::string out = c.output_dir.string();
  read(j, "output_dir", out, "config");
  c.output_dir = out;
  c.model.backbone.input_resolution = c.dataset.resolution;
  c.model.backbone.input_channels = dataset_channels(c.dataset);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (auto m : c.methods) methods.push_back(continual::to_string(m));
  const auto& b = c.model.backbone;
  json j = {
      {"dataset", dataset_json(c.dataset)},
      {"tasks", {{"count", c.task_count}, {"classes_per_task", c.classes_per_task}, {"test_fraction", c.test_fraction}}},
      {"methods", methods},
      {"seeds", c.seeds},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"learning_rate", c.training.learning_rate},
        {"translator_epochs", c.training.translator_epochs},
        {"translator_learning_rate", c.training.translator_learning_rate},
        {"eval_batch_size", c.training.eval_batch_size},
        {"crop_padding", c.training.augmentation.crop_padding},
        {"horizontal_flip", c.training.augmentation.horizontal_flip}}},
      {"pretraining",
       {{"epochs", c.training.pretrain_epochs},
        {"learning_rate", c.training.pretrain_learning_rate},
        {"corpus", dataset_json(c.pretrain_corpus)}}},
      {"model",
       {{"stage_channels", std::vector<std::size_t>(b.stage_channels.begin(), b.stage_channels.end())},
        {"embedding_dim", b.embedding_dim},
        {"attention_reduction", c.model.attention_reduction},
        {"fca_frequency_groups", c.model.fca_frequency_groups},
        {"share_alignment", c.model.share_alignment},
        {"alignment_feature_gradient", c.model.alignment_feature_gradient},
        {"frequency_cutoff", c.model.frequency_cutoff ? json(*c.model.frequency_cutoff) : json(nullptr)},
        {"cada",
         {{"epsilon", c.model.cada.epsilon},
          {"alpha", c.model.cada.alpha},
          {"beta", c.model.cada.beta},
          {"latent_dim", c.model.cada.latent_dim},
          {"hidden_dim", c.model.cada.hidden_dim},
          {"sigma_floor", c.model.cada.sigma_floor}}}}},
      {"regularizers",
       {{"lwf_gamma", c.lwf_gamma},
        {"ewc_gamma", c.ewc_gamma},
        {"mas_gamma", c.mas_gamma},
        {"margin", c.margin},
        {"sdc_bandwidth", c.sdc_bandwidth}}},
      {"output_dir", c.output_dir.string()},
  };
  return j.dump(2) + "\n";
}

Dataset load_dataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetKind::synthetic: {
      auto ds = make_synthetic(spec.synthetic);
      ds.name = spec.name;
      return ds;
    }
    case DatasetKind::cifar: {
      Dataset ds;
      if (std::filesystem::is_directory(spec.path)) {
        ds = load_cifar_directory(spec.path);
      } else {
        // A lone file has no split marker; its record size tells CIFAR-10 from CIFAR-100.
        std::error_code ec;
        const auto bytes = std::filesystem::file_size(spec.path, ec);
        if (ec) throw IoError(spec.path.string(), ec.message());
        const std::size_t label_bytes = bytes % 3073 != 0 && bytes % 3074 == 0 ? 2 : 1;
        ds = load_cifar_binary(spec.path, label_bytes, Split::train);
        ds.canonical_split.clear();
      }
      if (ds.height != spec.resolution) {
        Dataset resized{ds.name, ds.channels, spec.resolution, spec.resolution, {}, {}, ds.canonical_split};
        for (std::size_t i = 0; i < ds.size(); ++i) {
          resized.append(resize_bilinear(ds.image(i), ds.channels, ds.height, ds.width, spec.resolution), ds.labels[i]);
        }
        return resized;
      }
      return ds;
    }
    case DatasetKind::image_dir: return load_image_directory(spec.path, spec.channels, spec.resolution);
  }
  throw ConfigError("unknown dataset kind");
}

}  // namespace sfd::harness
