#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MVDNMF_CLI_PATH;
const std::string kToyManifest = MVDNMF_TOY_MANIFEST;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mvdnmf_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& stdout_path = "/dev/null") {
    const std::string command =
        kCli + " " + args + " >" + stdout_path + " 2>/dev/null";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& path) {
    std::ifstream in(path);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

// mean from the summary row: method,dataset,,,,mean,std
double summary_mean(const std::string& csv_path, const std::string& method) {
    std::ifstream in(csv_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(method + ",", 0) != 0) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() >= 7 && cells[2].empty() && !cells[5].empty())
            return std::stod(cells[5]);
    }
    FAIL(("no summary row for " + method + " in " + csv_path).c_str());
    return 0;
}

}  // namespace

TEST_CASE("fit on the bundled toy dataset") {
    TempDir dir;
    const int code = run("fit --data " + kToyManifest + " --out " + dir.file("model.json") +
                         " --k1 2 --k2 1 --k3 1 --k4 1 --max-iters 40 --trace " +
                         dir.file("trace.csv"),
                         dir.file("out.txt"));
    CHECK(code == 0);
    CHECK(fs::exists(dir.file("model.json")));
    CHECK(fs::exists(dir.file("trace.csv")));
    CHECK(count_lines(dir.file("trace.csv")) >= 2);
    const std::string out = slurp(dir.file("out.txt"));
    CHECK(out.find("status=") != std::string::npos);
    CHECK(out.find("objective=") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("fit --out /tmp/nope.json") == 1);   // missing --data
    CHECK(run("fit --data x --out y --bogus") == 1);
    CHECK(run("") == 1);  // a subcommand is required
}

TEST_CASE("data errors exit with code 2") {
    TempDir dir;
    CHECK(run("fit --data " + dir.file("missing.json") + " --out " +
              dir.file("m.json")) == 2);
    CHECK(run("validate --data " + dir.file("missing.json")) == 2);
}

TEST_CASE("fit output is byte-identical for a fixed seed") {
    TempDir dir;
    const std::string common = "fit --data " + kToyManifest +
                               " --k1 1 --k2 1 --k3 1 --k4 0 --max-iters 20 --seed 11";
    CHECK(run(common + " --out " + dir.file("a.json")) == 0);
    CHECK(run(common + " --out " + dir.file("b.json")) == 0);
    CHECK(slurp(dir.file("a.json")) == slurp(dir.file("b.json")));
}

TEST_CASE("synth, fit, predict and eval pipeline on planted data") {
    TempDir dir;
    const std::string data_dir = dir.file("planted");
    CHECK(run("synth --out-dir " + data_dir +
              " --n 200 --classes 4 --views 2 --feature-dims 30 40 "
              "--k1 4 --k2 2 --k3 4 --k4 2 --sigma 0.01 --delta 1.0 --seed 7") == 0);
    const std::string manifest = data_dir + "/manifest.json";
    REQUIRE(fs::exists(manifest));

    CHECK(run("validate --data " + manifest) == 0);

    CHECK(run("fit --data " + manifest + " --out " + dir.file("model.json") +
              " --max-iters 100 --seed 7 --embeddings " + dir.file("emb.csv")) == 0);
    CHECK(fs::exists(dir.file("emb.csv")));
    CHECK(count_lines(dir.file("emb.csv")) == 201);  // header + instances

    CHECK(run("predict --model " + dir.file("model.json") + " --data " + manifest +
              " --out " + dir.file("pred.csv")) == 0);
    CHECK(count_lines(dir.file("pred.csv")) == 201);

    // held-out accuracy through the full evaluation protocol
    CHECK(run("eval --data " + manifest +
              " --folds 5 --repeats 1 --max-iters 100 --seed 7 --out " +
              dir.file("results.csv")) == 0);
    CHECK(summary_mean(dir.file("results.csv"), "mvdnmf") >= 0.95);
}

TEST_CASE("eval with baselines and a grid file") {
    TempDir dir;
    const std::string data_dir = dir.file("small");
    CHECK(run("synth --out-dir " + data_dir +
              " --n 60 --classes 3 --views 2 --feature-dims 10 12 "
              "--k1 3 --k2 1 --k3 3 --k4 1 --sigma 0.05 --delta 2 --seed 3") == 0);
    const std::string manifest = data_dir + "/manifest.json";

    {
        std::ofstream grid(dir.file("grid.txt"));
        grid << "# two settings\n";
        grid << "alpha=0.1 beta=0.1\n";
        grid << "alpha=0.5 beta=0.05\n";
    }
    CHECK(run("eval --data " + manifest +
              " --folds 3 --repeats 1 --max-iters 30 --seed 3 --jobs 2"
              " --k1 3 --k2 1 --k3 3 --k4 1 --with-baselines --grid " +
              dir.file("grid.txt") + " --out " + dir.file("results.csv")) == 0);

    const std::string csv = slurp(dir.file("results.csv"));
    CHECK(csv.find("mvdnmf[alpha=0.1,beta=0.1]") != std::string::npos);
    CHECK(csv.find("mvdnmf[alpha=0.5,beta=0.05]") != std::string::npos);
    CHECK(csv.find("knn_view0") != std::string::npos);
    CHECK(csv.find("knn_view1") != std::string::npos);
    CHECK(csv.find("knn_concat") != std::string::npos);
    CHECK(csv.find("nmf_view0") != std::string::npos);
}

TEST_CASE("validate flags a corrupted dataset") {
    TempDir dir;
    const std::string data_dir = dir.file("corrupt");
    CHECK(run("synth --out-dir " + data_dir +
              " --n 20 --classes 2 --views 1 --feature-dims 5 "
              "--k1 1 --k2 0 --k3 1 --k4 0 --seed 1") == 0);
    // poison one entry
    const std::string view = data_dir + "/view_0.csv";
    std::string content = slurp(view);
    content.replace(content.find(','), 1, ",-");
    std::ofstream(view, std::ios::binary) << content;
    CHECK(run("validate --data " + data_dir + "/manifest.json") == 2);
}
