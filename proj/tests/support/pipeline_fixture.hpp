#pragma once

// Small raw dataset for end-to-end runs: image files and text payloads, no
// descriptions and no embeddings. Three 2AFC cases and two triplets; each
// case has its own attribute set ids.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "support/test_util.hpp"

namespace testutil {

inline std::filesystem::path write_pipeline_fixture(const std::filesystem::path& dir,
                                                    std::size_t cases = 5) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  nlohmann::json payloads = nlohmann::json::object();
  nlohmann::json list = nlohmann::json::array();
  auto image = [&](const std::string& id) {
    const fs::path p = dir / "images" / (id + ".png");
    write_file(p, "PNG-STUB " + id);
    payloads[id] = {{"kind", "image"}, {"path", "images/" + id + ".png"}};
  };
  auto text = [&](const std::string& id, const std::string& t) {
    payloads[id] = {{"kind", "text"}, {"text", t}};
  };
  for (std::size_t k = 0; k < cases; ++k) {
    const std::string c = "case" + std::to_string(k);
    image(c + "_src");
    text(c + "_ts", "a photo of object " + std::to_string(k));
    text(c + "_tt", "a painting of object " + std::to_string(k));
    nlohmann::json entry{{"case_id", c},
                         {"source_image", c + "_src"},
                         {"source_text", c + "_ts"},
                         {"target_text", c + "_tt"},
                         {"source_attributes", c + "_S"},
                         {"target_attributes", c + "_T"}};
    if (k < 3) {
      image(c + "_a");
      image(c + "_b");
      entry["edits"] = {{{"image", c + "_a"}, {"tag", "candidate_a"}},
                        {{"image", c + "_b"}, {"tag", "candidate_b"}}};
      entry["human_vote"] = k % 2 ? "candidate_b" : "candidate_a";
    } else {
      for (const char* tag : {"ground_truth", "over_preserved", "over_modified"}) {
        image(c + "_" + tag);
      }
      entry["edits"] = {{{"image", c + "_ground_truth"}, {"tag", "ground_truth"}},
                        {{"image", c + "_over_preserved"}, {"tag", "over_preserved"}},
                        {{"image", c + "_over_modified"}, {"tag", "over_modified"}}};
    }
    list.push_back(entry);
  }
  const nlohmann::json manifest{{"schema_version", 1},
                                {"name", "pipeline"},
                                {"payloads", payloads},
                                {"descriptions_file", "descriptions.json"},
                                {"cases", list}};
  write_file(dir / "manifest.json", manifest.dump(2));
  return dir / "manifest.json";
}

}  // namespace testutil
