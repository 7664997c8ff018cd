// Copyright 2026 The viewflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "viewflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "viewflow/error.hpp"

namespace viewflow {

namespace {

constexpr std::size_t kWordsPerTopic = 8;
constexpr std::size_t kTitleWords = 4;
constexpr double kFreshFraction = 0.4;
constexpr std::size_t kRecentItems = 3;

constexpr std::string_view kFiller[] = {
    "report", "team",   "update",  "notes",   "guide",  "review",
    "detail", "method", "results", "process", "design", "overview",
    "summary", "plan",  "lesson",  "insight"};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Pronounceable pseudo-word, unique per index.
std::string topic_word(std::size_t topic, std::size_t j) {
  static constexpr std::string_view kCons = "bdfgklmnprstvz";
  static constexpr std::string_view kVow = "aeiou";
  std::size_t w = topic * kWordsPerTopic + j;
  std::string out;
  for (int s = 0; s < 3; ++s) {
    std::size_t syl = w % (kCons.size() * kVow.size());
    w /= kCons.size() * kVow.size();
    out.push_back(kCons[syl % kCons.size()]);
    out.push_back(kVow[syl / kCons.size()]);
  }
  out.push_back('x');
  return out;
}

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec)
      : spec_(spec), rng_(spec.seed) {}

  SyntheticData run() {
    SyntheticData out;
    out.truth.rule = spec_.click_rule;
    make_articles(out);
    make_users(out);
    for (std::size_t i = 0; i < spec_.n_impressions; ++i) {
      make_impression(out, i);
    }
    return out;
  }

 private:
  double normal() { return normal_(rng_); }
  double uniform() { return uniform_(rng_); }
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  std::string sentence(std::size_t topic, std::size_t words) {
    std::string s;
    for (std::size_t w = 0; w < words; ++w) {
      if (!s.empty()) s.push_back(' ');
      if (uniform() < 0.5) {
        s += topic_word(topic, pick(kWordsPerTopic));
      } else {
        s += kFiller[pick(std::size(kFiller))];
      }
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    s.push_back('.');
    return s;
  }

  void make_articles(SyntheticData& out) {
    const std::size_t dim = spec_.embed_dim;
    centroids_.resize(spec_.topic_count);
    for (auto& c : centroids_) {
      c.resize(dim);
      for (auto& x : c) x = normal();
    }
    out.truth.matrix.assign(dim, std::vector<double>(dim));
    for (auto& row : out.truth.matrix) {
      for (auto& x : row) x = normal() / std::sqrt(static_cast<double>(dim));
    }
    const auto n_fresh = static_cast<std::size_t>(
        std::round(kFreshFraction * static_cast<double>(spec_.n_articles)));
    const std::size_t n_archive = spec_.n_articles - n_fresh;
    by_topic_archive_.assign(spec_.topic_count, {});
    by_topic_fresh_.assign(spec_.topic_count, {});

    for (std::size_t i = 0; i < spec_.n_articles; ++i) {
      // Round-robin keeps every topic populated when n_articles >= topics.
      std::size_t topic = i % spec_.topic_count;
      bool fresh = i >= n_archive;
      Article a;
      a.id = article_name(i);
      std::string title;
      for (std::size_t w = 0; w < kTitleWords; ++w) {
        if (!title.empty()) title.push_back(' ');
        title += topic_word(topic, pick(kWordsPerTopic));
      }
      a.title = std::move(title);
      std::size_t n_sent = 3 + pick(4);
      for (std::size_t s = 0; s < n_sent; ++s) {
        if (!a.body.empty()) a.body.push_back(' ');
        a.body += sentence(topic, 8 + pick(5));
      }
      a.attributes["category"] = topic_name(topic);
      a.attributes["age"] = fresh ? "fresh" : "archive";
      std::vector<double> v(spec_.embed_dim);
      for (std::size_t d = 0; d < v.size(); ++d) {
        v[d] = centroids_[topic][d] + 0.1 * normal();
      }
      out.truth.article_vectors.push_back(std::move(v));
      out.truth.article_topic.push_back(topic);
      (fresh ? by_topic_fresh_ : by_topic_archive_)[topic].push_back(i);
      if (fresh) fresh_.push_back(i);
      out.dataset.corpus.add(std::move(a));
    }
  }

  void make_users(SyntheticData& out) {
    for (std::size_t u = 0; u < spec_.n_users; ++u) {
      std::vector<double> vec(spec_.embed_dim);
      for (auto& x : vec) x = normal();
      out.truth.user_vectors.push_back(std::move(vec));
      out.truth.user_topic.push_back(pick(spec_.topic_count));
    }
  }

  double planted_logit(const GroundTruth& t, std::size_t user,
                       std::size_t article) const {
    const auto& u = t.user_vectors[user];
    const auto& v = t.article_vectors[article];
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double mv = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) mv += t.matrix[i][j] * v[j];
      s += u[i] * mv;
    }
    return spec_.planted_scale * s / std::sqrt(static_cast<double>(u.size()));
  }

  std::size_t sample_from(const std::vector<std::size_t>& pool,
                          std::size_t fallback_topic) {
    if (!pool.empty()) return pool[pick(pool.size())];
    // Topic has no article in the pool; fall back to any article of it.
    const auto& alt = by_topic_archive_[fallback_topic].empty()
                          ? by_topic_fresh_[fallback_topic]
                          : by_topic_archive_[fallback_topic];
    if (!alt.empty()) return alt[pick(alt.size())];
    return pick(spec_.n_articles);
  }

  void make_impression(SyntheticData& out, std::size_t index) {
    GroundTruth& t = out.truth;
    const std::size_t user = pick(spec_.n_users);
    Impression imp;
    imp.id = "I" + std::to_string(index);
    imp.user_id = user_name(user);
    imp.timestamp = static_cast<std::int64_t>(index) * 60;
    std::unordered_set<std::size_t> used;
    std::vector<double> probs;

    if (spec_.click_rule == ClickRule::kPlantedBilinear) {
      // History: articles the user clicked under the planted rule.
      std::size_t attempts = 0;
      while (imp.history.size() < spec_.history_length &&
             attempts < 1000 * spec_.history_length) {
        ++attempts;
        std::size_t a = pick(spec_.n_articles);
        if (used.count(a) != 0) continue;
        if (uniform() < sigmoid(planted_logit(t, user, a))) {
          used.insert(a);
          imp.history.push_back(article_name(a));
        }
      }
      std::vector<std::size_t> pool;
      for (std::size_t a = 0; a < spec_.n_articles; ++a) {
        if (used.count(a) == 0) pool.push_back(a);
      }
      std::shuffle(pool.begin(), pool.end(), rng_);
      pool.resize(std::min(pool.size(), spec_.candidates_per_impression));
      for (std::size_t a : pool) {
        double p = sigmoid(planted_logit(t, user, a));
        int label = uniform() < p ? 1 : 0;
        imp.candidates.push_back({article_name(a), label});
        probs.push_back(p);
      }
    } else {
      const std::size_t constant = t.user_topic[user];
      std::size_t recent = pick(spec_.topic_count);
      if (spec_.topic_count > 1) {
        while (recent == constant) recent = pick(spec_.topic_count);
      }
      const std::size_t n_old = spec_.history_length > kRecentItems
                                    ? spec_.history_length - kRecentItems
                                    : 0;
      for (std::size_t h = 0; h < n_old; ++h) {
        std::size_t topic = uniform() < 0.7 ? constant : pick(spec_.topic_count);
        std::size_t a = sample_from(by_topic_archive_[topic], topic);
        if (used.insert(a).second) imp.history.push_back(article_name(a));
      }
      for (std::size_t h = 0; h < std::min(kRecentItems, spec_.history_length);
           ++h) {
        std::size_t a = sample_from(by_topic_fresh_[recent], recent);
        if (used.insert(a).second) imp.history.push_back(article_name(a));
      }
      // Candidates: two of each planted topic, the rest random fresh articles.
      std::vector<std::size_t> cands;
      auto add_from = [&](const std::vector<std::size_t>& pool, std::size_t n) {
        std::vector<std::size_t> avail;
        for (std::size_t a : pool) {
          if (used.count(a) == 0) avail.push_back(a);
        }
        std::shuffle(avail.begin(), avail.end(), rng_);
        for (std::size_t i = 0; i < std::min(n, avail.size()); ++i) {
          if (cands.size() >= spec_.candidates_per_impression) return;
          used.insert(avail[i]);
          cands.push_back(avail[i]);
        }
      };
      add_from(by_topic_fresh_[constant], 2);
      add_from(by_topic_fresh_[recent], 2);
      add_from(fresh_, spec_.candidates_per_impression);
      if (cands.size() < spec_.candidates_per_impression) {
        std::vector<std::size_t> all(spec_.n_articles);
        std::iota(all.begin(), all.end(), 0);
        add_from(all, spec_.candidates_per_impression);
      }
      std::shuffle(cands.begin(), cands.end(), rng_);
      for (std::size_t a : cands) {
        std::size_t topic = t.article_topic[a];
        double logit = -2.0 + 4.0 * (topic == constant) + 4.0 * (topic == recent);
        double p = sigmoid(logit);
        int label = uniform() < p ? 1 : 0;
        imp.candidates.push_back({article_name(a), label});
        probs.push_back(p);
      }
    }
    t.candidate_probability.push_back(std::move(probs));
    out.dataset.impressions.push_back(std::move(imp));
  }

  const SyntheticSpec& spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::vector<std::vector<double>> centroids_;
  std::vector<std::vector<std::size_t>> by_topic_archive_;
  std::vector<std::vector<std::size_t>> by_topic_fresh_;
  std::vector<std::size_t> fresh_;
};

}  // namespace

std::string to_string(ClickRule rule) {
  return rule == ClickRule::kPlantedBilinear ? "planted-bilinear"
                                             : "topic-affinity";
}

ClickRule click_rule_from_string(const std::string& s) {
  if (s == "planted-bilinear") return ClickRule::kPlantedBilinear;
  if (s == "topic-affinity") return ClickRule::kTopicAffinity;
  throw ConfigError("unknown click rule: " + s);
}

void SyntheticSpec::validate() const {
  if (n_users < 1 || n_articles < 1 || n_impressions < 1 || embed_dim < 1 ||
      topic_count < 1 || candidates_per_impression < 1) {
    throw ConfigError("synthetic spec counts must all be >= 1");
  }
  if (topic_count > n_articles) {
    throw ConfigError("topic_count must not exceed n_articles");
  }
}

double GroundTruth::analytic_positive_rate() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : candidate_probability) {
    for (double p : row) {
      sum += p;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  return Generator(spec).run();
}

std::string user_name(std::size_t index) { return "U" + std::to_string(index); }
std::string article_name(std::size_t index) {
  return "A" + std::to_string(index);
}
std::string topic_name(std::size_t index) {
  return "topic" + std::to_string(index);
}

}  // namespace viewflow
