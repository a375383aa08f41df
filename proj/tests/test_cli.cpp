#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef KDLAB_CLI_PATH
#error "KDLAB_CLI_PATH must point at the built CLI binary"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "kdlab_cli_test";

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(KDLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli: gen-data, train, nasty, attack, eval flow") {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
    const fs::path data = kWorkDir / "data";
    const fs::path teacher = kWorkDir / "teacher.ckpt";
    const fs::path nasty = kWorkDir / "nasty.ckpt";
    const fs::path stolen = kWorkDir / "stolen.ckpt";

    CHECK(run_cli("gen-data --classes 3 --dim 6 --train-per-class 20 --test-per-class 8 "
                  "--separation 4 --noise 0.6 --seed 5 --out " + q(data)) == 0);
    CHECK(fs::exists(data / "train.ds"));
    CHECK(fs::exists(data / "test.ds"));

    CHECK(run_cli("train --dims 6 12 3 --epochs 3 --batch-size 16 --seed 1 --data-dir " +
                  q(data) + " --out " + q(teacher)) == 0);
    CHECK(fs::exists(teacher));

    CHECK(run_cli("nasty --dims 6 12 3 --epochs 2 --batch-size 16 --seed 2 --omega 0.04 "
                  "--tau-a 4 --reference " + q(teacher) + " --data-dir " + q(data) +
                  " --out " + q(nasty)) == 0);

    CHECK(run_cli("attack --method htc --dims 6 8 3 --epochs 2 --batch-size 16 --seed 3 "
                  "--teacher " + q(nasty) + " --data-dir " + q(data) + " --out " +
                  q(stolen)) == 0);

    CHECK(run_cli("eval --model " + q(stolen) + " --reference " + q(teacher) +
                  " --data-dir " + q(data)) == 0);

    fs::remove_all(kWorkDir);
}

TEST_CASE("cli: chain, defend and scm attack flow") {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
    const fs::path data = kWorkDir / "data";
    const fs::path teacher = kWorkDir / "teacher.ckpt";
    const fs::path nasty = kWorkDir / "nasty.ckpt";
    const fs::path chain_dir = kWorkDir / "chain";

    REQUIRE(run_cli("gen-data --classes 3 --dim 6 --train-per-class 15 --test-per-class 6 "
                    "--seed 9 --out " + q(data)) == 0);
    REQUIRE(run_cli("train --dims 6 10 3 --epochs 2 --batch-size 16 --seed 1 --data-dir " +
                    q(data) + " --out " + q(teacher)) == 0);
    REQUIRE(run_cli("nasty --dims 6 10 3 --epochs 2 --batch-size 16 --seed 2 --reference " +
                    q(teacher) + " --data-dir " + q(data) + " --out " + q(nasty)) == 0);

    CHECK(run_cli("chain --k 2 --epochs 2 --batch-size 16 --seed 4 --nasty " + q(nasty) +
                  " --data-dir " + q(data) + " --out " + q(chain_dir)) == 0);
    CHECK(fs::exists(chain_dir / "s1.ckpt"));
    CHECK(fs::exists(chain_dir / "s2.ckpt"));

    CHECK(run_cli("defend --chain-dir " + q(chain_dir) + " --index 2 --out " +
                  q(kWorkDir / "deployed.ckpt")) == 0);

    CHECK(run_cli("attack --method scm --dims 6 8 3 --epochs 2 --batch-size 16 --seed 5 "
                  "--chain-dir " + q(chain_dir) + " --data-dir " + q(data) + " --out " +
                  q(kWorkDir / "scm.ckpt")) == 0);

    fs::remove_all(kWorkDir);
}

TEST_CASE("cli: exit codes distinguish config and data errors") {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
    const fs::path data = kWorkDir / "data";
    REQUIRE(run_cli("gen-data --classes 3 --dim 6 --train-per-class 10 --test-per-class 4 "
                    "--seed 1 --out " + q(data)) == 0);

    // Config error: dims do not match the dataset.
    CHECK(run_cli("train --dims 5 3 --epochs 1 --data-dir " + q(data) + " --out " +
                  q(kWorkDir / "x.ckpt")) == 2);
    // Config error: invalid synthesis parameters.
    CHECK(run_cli("gen-data --classes 1 --out " + q(kWorkDir / "bad")) == 2);
    // Data error: missing dataset directory.
    CHECK(run_cli("train --dims 6 3 --epochs 1 --data-dir " + q(kWorkDir / "missing") +
                  " --out " + q(kWorkDir / "x.ckpt")) == 3);
    // Data error: checkpoint path that does not exist.
    CHECK(run_cli("eval --model " + q(kWorkDir / "none.ckpt") + " --data-dir " + q(data)) == 3);

    fs::remove_all(kWorkDir);
}
