// End-to-end checks running the installed carsel binary (path given by the
// CARSEL_BIN environment variable, set from CMake).
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* env = std::getenv("CARSEL_BIN");
  REQUIRE_MESSAGE(env != nullptr, "CARSEL_BIN must point at the carsel binary");
  return env;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("carsel_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(++counter));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Strip the provenance line; config hashes legitimately differ between
// commands that produced the same payload.
std::string payload(const std::string& path) {
  const std::string text = slurp(path);
  const std::size_t eol = text.find('\n');
  if (text.rfind("# carsel", 0) == 0 && eol != std::string::npos) {
    return text.substr(eol + 1);
  }
  return text;
}

}  // namespace

TEST_CASE("cli: exit codes for usage and data errors") {
  TempDir dir;
  CHECK(run("--definitely-not-a-flag") == 1);
  CHECK(run("score --genotypes missing.tsv --phenotype also_missing.tsv --out " +
            dir.file("x.tsv")) == 2);
}

TEST_CASE("cli: simulate then score is deterministic and honors lambda=1") {
  TempDir dir;
  const std::string prefix = dir.file("toy");
  REQUIRE(run("simulate --preset q1like --n 120 --d 300 --replicates 2 --seed 5 "
              "--out-prefix " + prefix) == 0);
  REQUIRE(fs::exists(prefix + ".genotypes.tsv"));
  REQUIRE(fs::exists(prefix + ".phenotypes.tsv"));
  REQUIRE(fs::exists(prefix + ".markers.tsv"));
  REQUIRE(fs::exists(prefix + ".truth.json"));

  const std::string base = "score --genotypes " + prefix + ".genotypes.tsv" +
                           " --phenotype " + prefix + ".phenotypes.tsv" +
                           " --replicate 1 ";
  REQUIRE(run(base + "--method car --lambda 0.1 --out " + dir.file("a.tsv")) == 0);
  REQUIRE(run(base + "--method car --lambda 0.1 --out " + dir.file("b.tsv")) == 0);
  CHECK(slurp(dir.file("a.tsv")) == slurp(dir.file("b.tsv")));

  // lambda = 1 CAR ranking equals COR ranking.
  REQUIRE(run(base + "--method car --lambda 1.0 --out " + dir.file("car1.tsv")) == 0);
  REQUIRE(run(base + "--method cor --out " + dir.file("cor.tsv")) == 0);
  auto ranked_ids = [](const std::string& path) {
    std::istringstream in(payload(path));
    std::string line, out;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto tab1 = line.find('\t');
      const auto tab2 = line.find('\t', tab1 + 1);
      out += line.substr(tab1 + 1, tab2 - tab1 - 1);
      out += '\n';
    }
    return out;
  };
  CHECK(ranked_ids(dir.file("car1.tsv")) == ranked_ids(dir.file("cor.tsv")));
}

TEST_CASE("cli: select writes the selection JSON") {
  TempDir dir;
  const std::string prefix = dir.file("toy");
  REQUIRE(run("simulate --preset q1like --n 150 --d 400 --replicates 1 --seed 9 "
              "--out-prefix " + prefix) == 0);
  REQUIRE(run("select --genotypes " + prefix + ".genotypes.tsv --phenotype " +
              prefix + ".phenotypes.tsv --method car --lambda 0.1 --cutoff 0.5 "
              "--out " + dir.file("sel.json")) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir.file("sel.json")));
  CHECK(doc["cutoff"] == 0.5);
  CHECK(doc.contains("eta0"));
  CHECK(doc.contains("null_scale"));
  CHECK(doc.contains("model_size"));
  CHECK(doc["selected"].is_array());
  CHECK(doc["fdr"].size() == doc["ranking"].size());

  // Selecting from the emitted score file gives the same model size.
  REQUIRE(run("score --genotypes " + prefix + ".genotypes.tsv --phenotype " +
              prefix + ".phenotypes.tsv --method car --lambda 0.1 --out " +
              dir.file("s.tsv")) == 0);
  REQUIRE(run("select --scores " + dir.file("s.tsv") + " --cutoff 0.5 --out " +
              dir.file("sel2.json")) == 0);
  const auto doc2 = nlohmann::json::parse(slurp(dir.file("sel2.json")));
  CHECK(doc2["model_size"] == doc["model_size"]);
}

TEST_CASE("cli: bench emits a report and is thread-count invariant") {
  TempDir dir;
  const std::string common =
      "bench --preset q1like --n 100 --d 250 --replicates 3 --seed 3 "
      "--k-grid 1,5,10,50 ";
  REQUIRE(run(common + "--threads 1 --out " + dir.file("r1.json")) == 0);
  REQUIRE(run(common + "--threads 4 --out " + dir.file("r4.json")) == 0);
  CHECK(slurp(dir.file("r1.json")) == slurp(dir.file("r4.json")));

  const auto doc = nlohmann::json::parse(slurp(dir.file("r1.json")));
  CHECK(doc["replicates"] == 3);
  CHECK(doc["tp_at_k"].contains("CAR"));
  CHECK(doc["tp_at_k"].contains("COR"));
  CHECK(doc["tp_at_k"].contains("RND"));
  CHECK(doc["model_size"].contains("CAR"));
  CHECK(!doc["model_size"].contains("RND"));
}

TEST_CASE("cli: evaluate consumes score files and truth") {
  TempDir dir;
  const std::string prefix = dir.file("toy");
  REQUIRE(run("simulate --preset q1like --n 150 --d 400 --replicates 2 --seed 4 "
              "--out-prefix " + prefix) == 0);
  for (int b = 1; b <= 2; ++b) {
    REQUIRE(run("score --genotypes " + prefix + ".genotypes.tsv --phenotype " +
                prefix + ".phenotypes.tsv --replicate " + std::to_string(b) +
                " --method car --lambda 0.1 --out " + dir.file("car" + std::to_string(b) + ".tsv")) == 0);
    REQUIRE(run("score --genotypes " + prefix + ".genotypes.tsv --phenotype " +
                prefix + ".phenotypes.tsv --replicate " + std::to_string(b) +
                " --method rnd --seed " + std::to_string(b) + " --out " +
                dir.file("rnd" + std::to_string(b) + ".tsv")) == 0);
  }
  REQUIRE(run("evaluate --truth " + prefix + ".truth.json --window 50 "
              "--k-grid 1,10,50 --out " + dir.file("report.json") +
              " --tp-curve " + dir.file("curve.tsv") + " --summary " +
              dir.file("summary.tsv") + " --recovery " + dir.file("rec.tsv") +
              " " + dir.file("car1.tsv") + " " + dir.file("car2.tsv") + " " +
              dir.file("rnd1.tsv") + " " + dir.file("rnd2.tsv")) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir.file("report.json")));
  CHECK(doc["replicates"] == 2);
  CHECK(doc["tp_at_k"].contains("CAR"));
  CHECK(doc["tp_at_k"].contains("RND"));
  CHECK(doc["model_size"].contains("CAR"));
  CHECK(fs::exists(dir.file("curve.tsv")));
  CHECK(fs::exists(dir.file("summary.tsv")));
  CHECK(fs::exists(dir.file("rec.tsv")));
}

TEST_CASE("cli: factor cache is built once and reused") {
  TempDir dir;
  const std::string prefix = dir.file("toy");
  REQUIRE(run("simulate --preset q1like --n 100 --d 250 --replicates 2 --seed 6 "
              "--out-prefix " + prefix) == 0);
  const std::string base = "score --genotypes " + prefix + ".genotypes.tsv" +
                           " --phenotype " + prefix + ".phenotypes.tsv" +
                           " --method car --lambda 0.1 --factor-cache " +
                           dir.file("f.lrc") + " ";
  REQUIRE(run(base + "--replicate 1 --out " + dir.file("c1.tsv")) == 0);
  REQUIRE(fs::exists(dir.file("f.lrc")));
  {
    std::ifstream cache(dir.file("f.lrc"), std::ios::binary);
    char magic[4];
    cache.read(magic, 4);
    CHECK(std::string(magic, 4) == "LRC1");
  }
  // Second run hits the cache and must give the identical result.
  REQUIRE(run(base + "--replicate 1 --out " + dir.file("c2.tsv")) == 0);
  CHECK(slurp(dir.file("c1.tsv")) == slurp(dir.file("c2.tsv")));
}

TEST_CASE("cli: numerical failures exit with code 3") {
  TempDir dir;
  // Phenotype exactly linear in a covariate -> zero residual variance.
  const std::string geno = dir.file("g.tsv");
  const std::string pheno = dir.file("p.tsv");
  {
    std::ofstream g(geno);
    g << "sample_id\tm1\tm2\n";
    const int codes1[6] = {0, 1, 2, 0, 1, 2};
    const int codes2[6] = {2, 0, 1, 1, 0, 2};
    for (int i = 0; i < 6; ++i) {
      g << 's' << i + 1 << '\t' << codes1[i] << '\t' << codes2[i] << '\n';
    }
    std::ofstream p(pheno);
    p << "sample_id\ty\tage\n";
    for (int i = 0; i < 6; ++i) {
      p << 's' << i + 1 << '\t' << 2 * (i + 1) << '\t' << i + 1 << '\n';
    }
  }
  CHECK(run("score --genotypes " + geno + " --phenotype " + pheno +
            " --method cor --out " + dir.file("out.tsv")) == 3);
}
