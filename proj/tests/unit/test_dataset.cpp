#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "wgcl/dataset.hpp"
#include "wgcl/error.hpp"
#include "wgcl/random.hpp"
#include "wgcl/synthetic.hpp"

namespace {

using wgcl::RawInteraction;

std::vector<RawInteraction> parse(const std::string& text) {
  std::istringstream in(text);
  return wgcl::parse_interactions(in);
}

// Random interaction lists over small id alphabets, so that k-core pruning
// has something to do.
std::vector<RawInteraction> random_raw(wgcl::Rng& rng, int users, int items, int count) {
  std::vector<RawInteraction> out;
  std::set<std::pair<int, int>> seen;
  for (int n = 0; n < count; ++n) {
    const int u = static_cast<int>(rng.below(users));
    const int i = static_cast<int>(rng.below(items));
    if (seen.emplace(u, i).second) out.push_back({"u" + std::to_string(u), "i" + std::to_string(i)});
  }
  return out;
}

std::map<std::string, int> degrees(const std::vector<RawInteraction>& xs, bool users) {
  std::map<std::string, int> d;
  for (const auto& x : xs) ++d[users ? x.user : x.item];
  return d;
}

TEST(ParseInteractions, DuplicatesCollapse) {
  const auto xs = parse("u1\ti1\nu1\ti1\nu2\ti1\n");
  ASSERT_EQ(xs.size(), 2u);
  EXPECT_EQ(xs[0], (RawInteraction{"u1", "i1"}));
  EXPECT_EQ(xs[1], (RawInteraction{"u2", "i1"}));
}

TEST(ParseInteractions, MissingTabReportsLineOne) {
  try {
    parse("u1\n");
    FAIL() << "expected a data error";
  } catch (const wgcl::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
  }
}

TEST(ParseInteractions, PreservesOrderAndIgnoresExtras) {
  const auto xs = parse("# header\nb\tx\t5\t1700000000\n\na\ty\r\nc\tz\n");
  ASSERT_EQ(xs.size(), 3u);
  EXPECT_EQ(xs[0], (RawInteraction{"b", "x"}));
  EXPECT_EQ(xs[1], (RawInteraction{"a", "y"}));
  EXPECT_EQ(xs[2], (RawInteraction{"c", "z"}));
}

TEST(ParseInteractions, EmptyInputIsDataError) {
  EXPECT_THROW(parse("# nothing\n\n"), wgcl::DataError);
}

TEST(KCore, CompleteSquareSurvives) {
  const std::vector<RawInteraction> xs{{"A", "X"}, {"A", "Y"}, {"B", "X"}, {"B", "Y"}};
  EXPECT_EQ(wgcl::kcore_filter(xs, 2), xs);
}

TEST(KCore, CascadeEmptiesPath) {
  const std::vector<RawInteraction> xs{{"A", "X"}, {"A", "Y"}, {"B", "X"}};
  EXPECT_TRUE(wgcl::kcore_filter(xs, 2).empty());
}

TEST(KCore, OneIsIdentity) {
  wgcl::Rng rng(1);
  const auto xs = random_raw(rng, 10, 10, 40);
  EXPECT_EQ(wgcl::kcore_filter(xs, 1), xs);
}

TEST(KCore, ZeroIsConfigError) {
  const std::vector<RawInteraction> xs{{"A", "X"}};
  EXPECT_THROW(wgcl::kcore_filter(xs, 0), wgcl::ConfigError);
}

TEST(KCoreProperty, IdempotentAndDegreeBounded) {
  wgcl::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int users = 2 + static_cast<int>(rng.below(15));
    const int items = 2 + static_cast<int>(rng.below(15));
    const auto xs = random_raw(rng, users, items, static_cast<int>(rng.below(120)) + 1);
    const std::size_t k = 1 + rng.below(4);
    const auto once = wgcl::kcore_filter(xs, k);
    ASSERT_EQ(wgcl::kcore_filter(once, k), once) << "trial " << trial;
    for (const auto& [id, d] : degrees(once, true)) ASSERT_GE(d, static_cast<int>(k)) << id;
    for (const auto& [id, d] : degrees(once, false)) ASSERT_GE(d, static_cast<int>(k)) << id;
    // Survivors keep their relative input order.
    std::size_t cursor = 0;
    for (const auto& x : once) {
      while (cursor < xs.size() && !(xs[cursor] == x)) ++cursor;
      ASSERT_LT(cursor, xs.size());
    }
  }
}

std::vector<RawInteraction> numbered(int n) {
  std::vector<RawInteraction> xs;
  for (int i = 0; i < n; ++i) xs.push_back({"u" + std::to_string(i % 7), "i" + std::to_string(i)});
  return xs;
}

TEST(Split, TenInteractionsGiveEightOneOne) {
  const auto ds = wgcl::split(numbered(10), {});
  EXPECT_EQ(ds.train.size(), 8u);
  EXPECT_EQ(ds.val.size(), 1u);
  EXPECT_EQ(ds.test.size(), 1u);
}

TEST(Split, SameSeedSameDataset) {
  const auto xs = numbered(200);
  const auto a = wgcl::split(xs, {});
  const auto b = wgcl::split(xs, {});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.user_names, b.user_names);
  EXPECT_EQ(a.item_names, b.item_names);
}

TEST(Split, DifferentSeedsGiveDifferentTrainSets) {
  const auto xs = numbered(50);
  wgcl::SplitSpec spec;
  spec.seed = 1000;
  const auto reference = wgcl::split(xs, spec).train;
  int differ = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    spec.seed = 1000 + s;
    auto train = wgcl::split(xs, spec).train;
    std::sort(train.begin(), train.end());
    auto ref = reference;
    std::sort(ref.begin(), ref.end());
    if (train != ref) ++differ;
  }
  EXPECT_GE(differ, 19);
}

TEST(Split, InvalidRatiosRejected) {
  wgcl::SplitSpec spec;
  spec.train = 0.7;
  EXPECT_THROW(wgcl::split(numbered(10), spec), wgcl::ConfigError);
}

TEST(SplitProperty, PartitionAndRatios) {
  wgcl::Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = random_raw(rng, 30, 40, 100 + static_cast<int>(rng.below(400)));
    wgcl::SplitSpec spec;
    spec.seed = rng.next();
    const auto ds = wgcl::split(xs, spec);
    std::vector<RawInteraction> back;
    for (const auto* part : {&ds.train, &ds.val, &ds.test})
      for (const auto& x : *part) {
        ASSERT_LT(x.user, ds.num_users);
        ASSERT_LT(x.item, ds.num_items);
        back.push_back({ds.user_names[x.user], ds.item_names[x.item]});
      }
    auto key = [](const RawInteraction& r) { return r.user + "\t" + r.item; };
    std::multiset<std::string> in;
    std::multiset<std::string> out;
    for (const auto& x : xs) in.insert(key(x));
    for (const auto& x : back) out.insert(key(x));
    ASSERT_EQ(in, out);
    const double n = static_cast<double>(xs.size());
    if (xs.size() >= 100) {
      ASSERT_GE(ds.train.size() / n, 0.78);
      ASSERT_LE(ds.train.size() / n, 0.82);
    }
    for (const auto& [name, id] : ds.user_forward) ASSERT_EQ(ds.user_names[id], name);
  }
}

TEST(Stats, CompleteBipartiteIsDense) {
  const std::vector<RawInteraction> xs{{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}};
  wgcl::SplitSpec spec{0.5, 0.25, 0.25, 1};
  const auto stats = wgcl::dataset_stats(wgcl::split(xs, spec));
  EXPECT_EQ(stats.num_interactions, 4u);
  EXPECT_EQ(stats.sparsity_percent(), "0.000%");
}

TEST(Stats, AmazonScaleSparsity) {
  wgcl::Dataset ds;
  ds.num_users = 58144;
  ds.num_items = 58051;
  ds.train.resize(2517437);
  EXPECT_EQ(wgcl::dataset_stats(ds).sparsity_percent(), "99.925%");
}

TEST(Stats, SingleUserTenItems) {
  wgcl::Dataset ds;
  ds.num_users = 1;
  ds.num_items = 10;
  ds.train.push_back({0, 3});
  const auto stats = wgcl::dataset_stats(ds);
  EXPECT_DOUBLE_EQ(stats.sparsity, 0.9);
  EXPECT_EQ(stats.sparsity_percent(), "90.000%");
}

TEST(Persistence, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "wgcl_dataset_roundtrip";
  std::filesystem::remove_all(dir);
  wgcl::SyntheticSpec syn;
  syn.num_users = 30;
  syn.num_items = 40;
  syn.per_user = 5;
  const auto ds = wgcl::split(wgcl::generate_synthetic(syn), {});
  wgcl::save_dataset(ds, dir);
  for (const char* f : {"train.tsv", "val.tsv", "test.tsv", "user_map.tsv", "item_map.tsv", "stats.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto back = wgcl::load_dataset(dir);
  EXPECT_EQ(back.num_users, ds.num_users);
  EXPECT_EQ(back.num_items, ds.num_items);
  EXPECT_EQ(back.train, ds.train);
  EXPECT_EQ(back.val, ds.val);
  EXPECT_EQ(back.test, ds.test);
  EXPECT_EQ(back.user_names, ds.user_names);
  std::filesystem::remove_all(dir);
}

TEST(Persistence, WriteInteractionsCreatesParentAndRoundTrips) {
  const auto dir = std::filesystem::temp_directory_path() / "wgcl_write_parent";
  std::filesystem::remove_all(dir);
  const std::vector<wgcl::RawInteraction> raw{{"u1", "a"}, {"u2", "b"}, {"u1", "b"}};
  const auto path = dir / "nested" / "x.tsv";
  wgcl::write_interactions(path, raw);
  const auto back = wgcl::load_interactions(path);
  ASSERT_EQ(back.size(), raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    EXPECT_EQ(back[k].user, raw[k].user);
    EXPECT_EQ(back[k].item, raw[k].item);
  }
  std::filesystem::remove_all(dir);
}

TEST(Synthetic, ShapeAndGroupBias) {
  const wgcl::SyntheticSpec spec;
  const auto xs = wgcl::generate_synthetic(spec);
  EXPECT_EQ(xs.size(), std::size_t{spec.num_users} * spec.per_user);
  std::size_t in_group = 0;
  for (const auto& x : xs) {
    const int u = std::stoi(x.user.substr(1));
    const int i = std::stoi(x.item.substr(1));
    if (u % 4 == i % 4) ++in_group;
  }
  const double frac = static_cast<double>(in_group) / static_cast<double>(xs.size());
  EXPECT_GT(frac, 0.75);
  EXPECT_LT(frac, 0.85);
  EXPECT_EQ(wgcl::generate_synthetic(spec), xs);
}

}  // namespace
