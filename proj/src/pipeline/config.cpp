#include "divcomb/pipeline/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "divcomb/core/parallel.hpp"
#include "divcomb/methods/pool.hpp"

namespace divcomb::pipeline {

int RunConfig::effective_threads() const { return threads > 0 ? threads : hardware_threads(); }

Frequency RunConfig::frequency_for(FrequencyLabel label) const {
  const auto it = seasonal_periods.find(std::string(frequency_name(label)));
  return it == seasonal_periods.end() ? Frequency::of(label) : Frequency::with_period(label, it->second);
}

RunConfig default_config() {
  RunConfig c;
  c.pool = methods::default_pool_ids();
  return c;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_config, "configuration must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data") {
        value.get_to(c.data);
      } else if (key == "test_data") {
        value.get_to(c.test_data);
      } else if (key == "reference_data") {
        value.get_to(c.reference_data);
      } else if (key == "format") {
        value.get_to(c.format);
        if (c.format != "m4" && c.format != "long") {
          throw Error(ErrorKind::invalid_config, "format must be \"m4\" or \"long\"");
        }
      } else if (key == "frequencies") {
        value.get_to(c.frequencies);
      } else if (key == "pool") {
        value.get_to(c.pool);
      } else if (key == "level") {
        value.get_to(c.level);
      } else if (key == "mcb_alpha") {
        value.get_to(c.mcb_alpha);
      } else if (key == "tradeoff") {
        value.get_to(c.tradeoff);
      } else if (key == "gbm") {
        gbm::from_json(value, c.gbm);
      } else if (key == "threads") {
        value.get_to(c.threads);
      } else if (key == "seed") {
        value.get_to(c.seed);
      } else if (key == "out") {
        value.get_to(c.out);
      } else if (key == "seasonal_periods") {
        value.get_to(c.seasonal_periods);
      } else if (key == "horizon") {
        c.horizon = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
      } else if (key == "sample_size") {
        value.get_to(c.sample_size);
      } else if (key == "sample_seed") {
        value.get_to(c.sample_seed);
      } else if (key == "external_features") {
        value.get_to(c.external_features);
      } else {
        throw Error(ErrorKind::invalid_config, "unknown configuration key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_config, e.what());
  }
  if (!(c.level > 0.0 && c.level < 1.0)) throw Error(ErrorKind::invalid_config, "level must be in (0,1)");
  for (const auto& f : c.frequencies) {
    if (!parse_frequency(f)) throw Error(ErrorKind::invalid_config, "unknown frequency '" + f + "'");
  }
  for (const auto& [f, m] : c.seasonal_periods) {
    if (!parse_frequency(f) || m < 1) throw Error(ErrorKind::invalid_config, "bad seasonal period for '" + f + "'");
  }
  methods::Pool validated(c.pool);
  c.gbm.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::invalid_config, path.string() + ": " + e.what());
  }
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json g;
  gbm::to_json(g, c.gbm);
  return nlohmann::json{{"data", c.data},
                        {"test_data", c.test_data},
                        {"reference_data", c.reference_data},
                        {"format", c.format},
                        {"frequencies", c.frequencies},
                        {"pool", c.pool},
                        {"level", c.level},
                        {"mcb_alpha", c.mcb_alpha},
                        {"tradeoff", c.tradeoff},
                        {"gbm", g},
                        {"threads", c.threads},
                        {"seed", c.seed},
                        {"out", c.out},
                        {"seasonal_periods", c.seasonal_periods},
                        {"horizon", c.horizon ? nlohmann::json(*c.horizon) : nlohmann::json(nullptr)},
                        {"sample_size", c.sample_size},
                        {"sample_seed", c.sample_seed},
                        {"external_features", c.external_features}};
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string manifest_hash(const RunConfig& config) {
  auto j = config_to_json(config);
  j.erase("threads");
  j.erase("out");
  j["gbm"].erase("threads");
  return sha256_hex(j.dump());
}

}  // namespace divcomb::pipeline
