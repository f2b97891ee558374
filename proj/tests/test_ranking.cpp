#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "signdict/catalog.hpp"
#include "signdict/error.hpp"
#include "signdict/ranking.hpp"
#include "signdict/rng.hpp"

using namespace signdict;
using recognizer::Distribution;

namespace {

const std::filesystem::path kFixture = std::filesystem::path(SIGNDICT_TEST_DATA) / "catalog_177.tsv";

VocabularyCatalog tiny(std::size_t n) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = "c" + std::to_string(i);
    text += id + "\tG" + std::to_string(i) + "\tnone\tone\ttorso\t-\t" + id + ".mp4\n";
  }
  return parse_catalog(text);
}

Distribution random_distribution(std::size_t n, Rng& rng) {
  Distribution d;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // coarse values so that ties happen
    d.probabilities.push_back(static_cast<double>(rng.below(20)));
    total += d.probabilities.back();
  }
  if (total == 0.0) total = 1.0;
  for (double& p : d.probabilities) p /= total;
  return d;
}

int order_of(Confidence c) { return static_cast<int>(c); }

}  // namespace

TEST_CASE("confidence bands") {
  CHECK(confidence_label(0.0) == Confidence::unlikely);
  CHECK(confidence_label(1.0 / 3.0) == Confidence::possibly);
  CHECK(confidence_label(0.5) == Confidence::possibly);
  CHECK(confidence_label(2.0 / 3.0) == Confidence::probably);
  CHECK(confidence_label(0.80) == Confidence::probably);
  CHECK(confidence_label(1.0) == Confidence::probably);
  CHECK(confidence_label(0.3333) == Confidence::unlikely);
  CHECK(confidence_label(0.6666) == Confidence::possibly);
  CHECK_THROWS_AS((void)confidence_label(-0.01), Error);
  CHECK_THROWS_AS((void)confidence_label(1.01), Error);
  CHECK(to_string(Confidence::probably) == "probably");
}

TEST_CASE("confidence is monotone in p") {
  Confidence prev = confidence_label(0.0);
  for (int i = 1; i <= 100000; ++i) {
    const auto c = confidence_label(i / 100000.0);
    REQUIRE(order_of(c) >= order_of(prev));
    prev = c;
  }
}

TEST_CASE("rank examples") {
  const auto c3 = tiny(3);
  const auto r = rank(Distribution{{0.2, 0.7, 0.1}}, c3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].class_index == 1);
  CHECK(r[1].class_index == 0);
  CHECK(r[2].class_index == 2);
  CHECK(r[0].rank == 1);
  CHECK(r[0].rendition_id == "c1");
  CHECK(r[0].confidence == Confidence::probably);

  const auto u = rank(Distribution{std::vector<double>(5, 0.2)}, tiny(5));
  for (std::size_t i = 0; i < 5; ++i) CHECK(u[i].class_index == i);

  const auto catalog = load_catalog(kFixture);
  std::vector<double> hot(catalog.size(), 0.0);
  hot[100] = 1.0;
  const auto h = rank(Distribution{hot}, catalog);
  CHECK(h[0].class_index == 100);
  CHECK(h[0].gloss == catalog.entry(100).gloss);
  CHECK(h[0].metadata == catalog.entry(100).metadata);

  CHECK_THROWS_AS((void)rank(Distribution{{0.5, 0.5}}, c3), Error);
}

TEST_CASE("rank is a sorted permutation with contiguous ranks") {
  const auto catalog = load_catalog(kFixture);
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto r = rank(random_distribution(catalog.size(), rng), catalog);
    std::set<ClassIndex> seen;
    for (std::size_t i = 0; i < r.size(); ++i) {
      seen.insert(r[i].class_index);
      CHECK(r[i].rank == i + 1);
      CHECK(r[i].original_rank == i + 1);
      if (i > 0) {
        CHECK(r[i - 1].probability >= r[i].probability);
        if (r[i - 1].probability == r[i].probability) CHECK(r[i - 1].class_index < r[i].class_index);
      }
    }
    CHECK(seen.size() == catalog.size());
  }
}

TEST_CASE("compose_view") {
  const auto catalog = load_catalog(kFixture);
  Rng rng(2);
  const auto r = rank(random_distribution(catalog.size(), rng), catalog);

  const auto compact = compose_view(r, ViewKind::compact);
  REQUIRE(compact.primary.has_value());
  CHECK(*compact.primary == r[0]);
  REQUIRE(compact.grid.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(compact.grid[i] == r[i + 1]);

  const auto detailed = compose_view(r, ViewKind::detailed);
  CHECK_FALSE(detailed.primary.has_value());
  REQUIRE(detailed.grid.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(detailed.grid[i] == r[i]);

  const auto four = rank(Distribution{{0.1, 0.2, 0.3, 0.4}}, tiny(4));
  CHECK(compose_view(four, ViewKind::detailed).grid.size() == 4);
  const auto one = rank(Distribution{{1.0}}, tiny(1));
  const auto solo = compose_view(one, ViewKind::compact);
  CHECK(solo.primary.has_value());
  CHECK(solo.grid.empty());
  CHECK_THROWS_AS((void)compose_view({}, ViewKind::compact), Error);

  CHECK(parse_view_kind("detailed") == ViewKind::detailed);
  CHECK_THROWS_AS((void)parse_view_kind("huge"), Error);
}

TEST_CASE("filter by hands keeps the 40 one-handed entries in order") {
  const auto catalog = load_catalog(kFixture);
  std::size_t one_handed = 0;
  for (const auto& e : catalog.entries()) one_handed += e.metadata.hands == Hands::one;
  REQUIRE(one_handed == 40);

  Rng rng(5);
  const auto r = rank(random_distribution(catalog.size(), rng), catalog);
  const auto f = filter_results(r, parse_filter("", "one", "", ""));
  REQUIRE(f.size() == 40);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i].metadata.hands == Hands::one);
    CHECK(f[i].rank == i + 1);
    CHECK(r[f[i].original_rank - 1].class_index == f[i].class_index);
    if (i > 0) CHECK(f[i - 1].original_rank < f[i].original_rank);
  }
}

TEST_CASE("filters are conjunctive and idempotent") {
  const auto catalog = load_catalog(kFixture);
  Rng rng(6);
  const auto r = rank(random_distribution(catalog.size(), rng), catalog);

  CHECK(filter_results(r, FilterCriteria{}) == r);

  const auto both = parse_filter("repeated", "", "face", "");
  const auto f = filter_results(r, both);
  std::size_t expected = 0;
  for (const auto& x : r)
    expected += x.metadata.movement == Movement::repeated && x.metadata.location == Location::face;
  CHECK(f.size() == expected);
  for (const auto& x : f) {
    CHECK(x.metadata.movement == Movement::repeated);
    CHECK(x.metadata.location == Location::face);
  }
  CHECK(filter_results(f, both) == f);

  const auto shape = filter_results(r, parse_filter("", "", "", "B"));
  for (const auto& x : shape) CHECK(x.metadata.handshape == std::optional<std::string>("B"));

  CHECK(both.describe() == "movement=repeated, location=face");
  CHECK(FilterCriteria{}.describe() == "None");
  CHECK_THROWS_AS((void)parse_filter("wiggly", "", "", ""), Error);
  CHECK_THROWS_AS((void)parse_filter("", "three", "", ""), Error);
}
