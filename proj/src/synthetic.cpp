#include "augclip/synthetic.hpp"

#include <cmath>

#include "augclip/error.hpp"
#include "augclip/projection.hpp"

namespace augclip {

namespace fs = std::filesystem;

Vector random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vector v(dim);
    for (auto& x : v) x = gauss(rng);
    const double n = norm(v);
    if (n > 1e-6) {
      for (auto& x : v) x /= n;
      return v;
    }
  }
}

linalg::Matrix random_orthogonal(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Rows of q are orthonormalized Gaussian rows; the sign of each row follows
  // the sign of the original diagonal, which makes the result Haar.
  linalg::Matrix q(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (;;) {
      Vector row(dim);
      for (auto& x : row) x = gauss(rng);
      const double diag_sign = row[i] < 0.0 ? -1.0 : 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < i; ++k) {
          const double p = dot(q.row(k), row);
          for (std::size_t j = 0; j < dim; ++j) row[j] -= p * q(k, j);
        }
      }
      const double n = norm(row);
      if (n < 1e-8) continue;
      for (std::size_t j = 0; j < dim; ++j) q(i, j) = diag_sign * row[j] / n;
      break;
    }
  }
  return q;
}

EmbeddingStore rotate_store(const EmbeddingStore& store, const linalg::Matrix& q) {
  EmbeddingStore out(store.provenance());
  for (const auto& e : store.entries()) out.insert(e.id, e.kind, linalg::multiply(q, e.raw));
  return out;
}

namespace {

Vector jitter(std::span<const double> base, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, sigma);
  Vector v(base.begin(), base.end());
  for (auto& x : v) x += gauss(rng);
  return v;
}

Vector unit(std::span<const double> v) { return normalize(v).vector(); }

struct CaseBuilder {
  const SyntheticConfig& cfg;
  std::mt19937_64& rng;
  SyntheticDataset& data;

  void add_text(const std::string& id, const Vector& v, const std::string& text) {
    data.store.insert(id, EmbeddingKind::text, v);
    data.manifest.payloads.emplace(id, Payload{EmbeddingKind::text, text});
  }

  AttributeSet attributes(const std::string& case_id, Role role, const Vector& center,
                          std::size_t count) {
    AttributeSet set;
    set.role = role;
    set.origin = Origin::generated;
    for (std::size_t k = 0; k < count; ++k) {
      std::string d = case_id + " " + std::string(to_string(role)) + " attribute " +
                      std::to_string(k);
      Vector v = unit(jitter(center, cfg.attribute_spread, rng));
      data.store.insert(d, EmbeddingKind::text, v);
      set.descriptions.push_back(d);
      set.embeddings.emplace_back(std::move(v), true);
    }
    return set;
  }

  Vector over_modified(const Hyperplane& h, const Vector& i_src) {
    const Vector w_hat = unit(h.w);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vector r = random_unit(cfg.dim, rng);
      for (double t = 0.0; t <= 8.0; t += 0.25) {
        Vector x = r;
        axpy(t, w_hat, x);
        x = unit(x);
        if (h.decision(x) > 0.0 && dot(x, i_src) < 0.2) return x;
      }
    }
    throw Error(ErrorCode::DegenerateData, "could not place an over-modified edit");
  }

  void build(std::size_t index, bool triplet) {
    const std::string id = (triplet ? "t" : "p") + std::to_string(index);
    const Vector c_s = random_unit(cfg.dim, rng);
    const Vector c_t = random_unit(cfg.dim, rng);

    AttributeSet source = attributes(id, Role::source, c_s, cfg.source_attributes);
    AttributeSet target = attributes(id, Role::target, c_t, cfg.target_attributes);

    const Vector i_src = unit(jitter(c_s, cfg.attribute_spread, rng));
    data.store.insert(id + "/source_image", EmbeddingKind::image, i_src);
    add_text(id + "/source_text", unit(jitter(c_s, cfg.attribute_spread, rng)),
             "source prompt " + id);
    add_text(id + "/target_text", unit(jitter(c_t, cfg.attribute_spread, rng)),
             "target prompt " + id);

    const WeightVector weights = cfg.weighting
                                     ? compute_weights(source, target, cfg.weighting_cfg)
                                     : uniform_weights(source.size(), target.size());
    const Hyperplane h = fit(cfg.fitter, source, target, weights, cfg.fit);
    const ModificationResult proj = modification_vector(h.w, h.b, i_src);

    const Vector gt = unit(jitter(proj.ideal, cfg.sigma, rng));
    const Vector op = unit(jitter(i_src, cfg.sigma, rng));
    const Vector om = over_modified(h, i_src);

    CaseRecord c;
    c.case_id = id;
    c.source_image_id = id + "/source_image";
    c.source_text_id = id + "/source_text";
    c.target_text_id = id + "/target_text";
    c.source_attributes_id = id + "/source";
    c.target_attributes_id = id + "/target";

    if (triplet) {
      c.kind = CaseKind::triplet;
      for (auto [tag, v] : {std::pair{EditTag::ground_truth, &gt},
                            std::pair{EditTag::over_preserved, &op},
                            std::pair{EditTag::over_modified, &om}}) {
        const std::string img = id + "/" + std::string(to_string(tag));
        data.store.insert(img, EmbeddingKind::image, *v);
        c.edited.push_back({img, tag});
      }
    } else {
      c.kind = CaseKind::two_afc;
      std::bernoulli_distribution coin(0.5), flip(cfg.vote_flip);
      const Vector& other = coin(rng) ? op : om;
      const bool good_is_a = coin(rng);
      const Vector& a = good_is_a ? gt : other;
      const Vector& b = good_is_a ? other : gt;
      data.store.insert(id + "/candidate_a", EmbeddingKind::image, a);
      data.store.insert(id + "/candidate_b", EmbeddingKind::image, b);
      c.edited.push_back({id + "/candidate_a", EditTag::candidate_a});
      c.edited.push_back({id + "/candidate_b", EditTag::candidate_b});
      const bool vote_a = flip(rng) ? !good_is_a : good_is_a;
      c.human_vote = vote_a ? EditTag::candidate_a : EditTag::candidate_b;
    }

    source.embeddings.clear();
    target.embeddings.clear();
    data.manifest.attribute_sets.emplace(c.source_attributes_id, std::move(source));
    data.manifest.attribute_sets.emplace(c.target_attributes_id, std::move(target));
    data.manifest.cases.push_back(std::move(c));
  }
};

}  // namespace

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& cfg) {
  if (cfg.dim < 2) throw Error(ErrorCode::InvalidArgument, "synthetic dim must be >= 2");
  if (cfg.source_attributes == 0 || cfg.target_attributes == 0) {
    throw Error(ErrorCode::InvalidArgument, "synthetic attribute counts must be >= 1");
  }
  if (!(cfg.sigma >= 0.0) || !(cfg.attribute_spread >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic noise levels must be >= 0");
  }
  if (!(cfg.vote_flip >= 0.0 && cfg.vote_flip <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "vote_flip must be in [0, 1]");
  }
  SyntheticDataset data{Manifest{}, EmbeddingStore("synthetic seed=" + std::to_string(cfg.seed))};
  data.manifest.name = "synthetic";
  std::mt19937_64 rng(cfg.seed);
  CaseBuilder builder{cfg, rng, data};
  for (std::size_t i = 0; i < cfg.triplets; ++i) builder.build(i, true);
  for (std::size_t i = 0; i < cfg.two_afc; ++i) builder.build(i, false);
  return data;
}

void write_dataset(const SyntheticDataset& data, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  Manifest m = data.manifest;
  m.base_dir = dir;
  m.descriptions_file = dir / "descriptions.json";
  write_descriptions(m.attribute_sets, *m.descriptions_file);
  write_manifest(m, dir / "manifest.json");
  emit_store(data.store, dir / "store.tsv");
}

}  // namespace augclip
