#include "../tools/usclab/record.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace usclab;

namespace {

const std::filesystem::path kDir = USC_SCENARIO_DIR;

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / ("usclab_test_" + name + ".yaml");
    std::ofstream(p) << text;
    return p;
}

Scenario small_identity(std::uint64_t seed = 1) {
    return load_scenario(kDir / "identity.yaml", {"sampling.points=2000", "sampling.seed=" + std::to_string(seed)});
}

}  // namespace

TEST(Scenarios, EveryBuiltInParses) {
    const auto reg = scenario_registry(kDir);
    EXPECT_GE(reg.size(), 7u);
    for (const auto& [name, path] : reg) {
        const auto s = load_scenario(path);
        EXPECT_EQ(s.name, name);
        EXPECT_FALSE(s.schedule.empty()) << name;
        EXPECT_NO_THROW(build_map(s, s.schedule.front())) << name;
    }
}

TEST(Scenarios, DefaultsAndOverrides) {
    const auto s = load_scenario(kDir / "identity.yaml");
    EXPECT_EQ(s.sampling.entropy.depth, std::stoi(defaults_table().at("estimator.depth")));
    EXPECT_EQ(s.sampling.seed, 1u);
    const auto o = load_scenario(kDir / "identity.yaml", {"sampling.seed=9", "estimator.depth=6"});
    EXPECT_EQ(o.sampling.seed, 9u);
    EXPECT_EQ(o.sampling.entropy.depth, 6);
    EXPECT_THROW(load_scenario(kDir / "identity.yaml", {"no_equals_sign"}), ConfigError);
}

TEST(Scenarios, UnknownKeyNamesItsLine) {
    const auto p = write_temp("bad_key", "name: x\nfamily: identity\nschedule: [0]\nsampling:\n  pointz: 10\n");
    try {
        load_scenario(p);
        FAIL() << "expected a configuration error";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
        EXPECT_NE(msg.find("pointz"), std::string::npos) << msg;
    }
}

TEST(Scenarios, RejectsBadFamilyAndTypes) {
    EXPECT_THROW(load_scenario(write_temp("bad_family", "name: x\nfamily: nope\nschedule: [0]\n")), ConfigError);
    EXPECT_THROW(load_scenario(write_temp("bad_type", "name: x\nfamily: identity\nschedule: [0]\nsampling:\n  points: many\n")),
                 ConfigError);
}

TEST(Record, IdentityRunIsDeterministicAndReplays) {
    const auto a = run_scenario(small_identity());
    const auto b = run_scenario(small_identity());
    EXPECT_TRUE(a.all_pass());
    EXPECT_EQ(csv_text(a), csv_text(b));
    const auto csv = csv_text(a);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,weak_star,lambda_sigma_plus,lambda_plus,lambda_minus,lambda_center,"
                                             "entropy,entropy_std_error,trusted_depth,beta,gamma,ruelle_residual,"
                                             "bound_partition_entropy,bound_bracket,bound_constant_term,bound_total,"
                                             "bound_lhs,bound_holds,complete");

    const auto j = record_to_json(a);
    const auto ok = verify_replay(j);
    EXPECT_TRUE(ok.ok());
    EXPECT_EQ(ok.verdicts.size(), a.verdicts.size());

    auto tampered = j;
    tampered["rows"][0]["bound"]["total"] = tampered["rows"][0]["bound"]["total"].get<double>() + 1.0;
    EXPECT_FALSE(verify_replay(tampered).ok());

    auto residual = j;
    residual["rows"][0]["ruelle_residual"] = -1.0;
    EXPECT_FALSE(verify_replay(residual).ok());
}

TEST(Record, WritesThreeFilesAndRelativePlot) {
    const auto rec = run_scenario(small_identity());
    const auto out = std::filesystem::temp_directory_path() / "usclab_test_out";
    const auto files = write_record(rec, out);
    for (const auto& p : {files.csv, files.json, files.plot}) EXPECT_TRUE(std::filesystem::exists(p)) << p;
    std::ifstream in(files.plot);
    const std::string gp((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_NE(gp.find("plot 'identity.csv'"), std::string::npos);
    EXPECT_EQ(gp.find(out.string()), std::string::npos);
}
