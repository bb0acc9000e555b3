#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ckn/acceptance.hpp"
#include "ckn/parallel.hpp"

int main(int argc, char** argv) {
  ckn::AcceptanceOptions opt;
  opt.jobs = ckn::default_jobs();
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  ckn::run_acceptance(opt, only, [&](const ckn::CriterionResult& r) {
    std::printf("%s\n", ckn::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  });
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
