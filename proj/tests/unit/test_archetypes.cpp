#include "nprsim/archetypes.hpp"

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "nprsim/errors.hpp"

namespace nprsim {
namespace {

TEST(Archetypes, BuiltinsCoverTable) {
  const auto all = builtin_archetypes();
  ASSERT_EQ(all.size(), 8u);
  int reported = 0;
  for (const auto& m : all) {
    EXPECT_NO_THROW(m.validate()) << m.part_id;
    reported += m.band_reported ? 1 : 0;
  }
  EXPECT_EQ(reported, 6);
}

TEST(Archetypes, Sdp810BandMidpoint) {
  EXPECT_NEAR(natural_resonant_hz(archetype("SDP810-500PA")), 880.0, 1e-9);
}

TEST(Archetypes, UnknownIdListsKnownOnes) {
  try {
    archetype("NOPE");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("A1011-00"), std::string::npos);
  }
}

TEST(Archetypes, DataFileMatchesBuiltins) {
  const auto file = load_archetypes(std::string(NPRSIM_SOURCE_DIR) + "/data/archetypes.json");
  const auto builtin = builtin_archetypes();
  ASSERT_EQ(file.size(), builtin.size());
  for (std::size_t i = 0; i < file.size(); ++i) {
    EXPECT_EQ(file[i].part_id, builtin[i].part_id);
    EXPECT_DOUBLE_EQ(file[i].base_resonant_hz.lo, builtin[i].base_resonant_hz.lo);
    EXPECT_DOUBLE_EQ(file[i].base_resonant_hz.hi, builtin[i].base_resonant_hz.hi);
    EXPECT_EQ(file[i].band_reported, builtin[i].band_reported);
  }
}

TEST(Archetypes, ParserRejectsUnknownKeys) {
  EXPECT_THROW(parse_archetypes(R"([{"part_id":"X","transducer":"capacitive","pressure_range_pa":[0,1],
      "resonant_band_hz":[100,110],"colour":"red"}])"),
               ConfigError);
}

TEST(Archetypes, EnvironmentDirectoryOverridesBuiltins) {
  const auto dir = std::filesystem::temp_directory_path() / "nprsim_arch_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "archetypes.json")
      << R"([{"part_id":"LAB-1","transducer":"capacitive","pressure_range_pa":[-50,50],"resonant_band_hz":[400,410]}])";
  setenv(kArchetypeDirEnv, dir.c_str(), 1);
  const auto pool = default_archetypes();
  unsetenv(kArchetypeDirEnv);
  ASSERT_EQ(pool.size(), 1u);
  EXPECT_NEAR(natural_resonant_hz(pool[0]), 405.0, 1e-9);
}

}  // namespace
}  // namespace nprsim
