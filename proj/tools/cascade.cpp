#include "cascade/bm25.hpp"
#include "cascade/checkpoint.hpp"
#include "cascade/click.hpp"
#include "cascade/errors.hpp"
#include "cascade/log.hpp"
#include "cascade/metrics.hpp"
#include "cascade/mining.hpp"
#include "cascade/mips.hpp"
#include "cascade/rng.hpp"
#include "cascade/scaling.hpp"
#include "cascade/search.hpp"
#include "cascade/trainer.hpp"
#include "cascade/trec.hpp"
#include "cascade/vocab.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace cascade;
namespace fs = std::filesystem;

// Flattens `[section] key=value` into `section.key=value` so config sections
// land on the dotted option names instead of being routed to subcommands.
class FlatConfig : public CLI::ConfigBase {
public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> flat;
    for (CLI::ConfigItem item : CLI::ConfigBase::from_config(input)) {
      if (item.name == "++" || item.name == "--") continue;
      for (auto it = item.parents.rbegin(); it != item.parents.rend(); ++it) {
        item.name = *it + "." + item.name;
      }
      item.parents.clear();
      flat.push_back(std::move(item));
    }
    return flat;
  }
};

// Every knob the tool understands; config-file sections map onto the dotted
// option names (e.g. [encoder] hidden=64 -> --encoder.hidden).
struct Options {
  // globals
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  unsigned threads = 1;

  // paths
  std::string corpus;
  std::string synonyms;
  std::string logs;
  std::string vocab_file;
  std::string retriever_pairs;
  std::string reranker_pairs;
  std::string instances;
  std::string retriever_model;
  std::string cross_model;
  std::string index;
  std::string queries;
  std::string qrels;

  // log generation
  std::size_t gen_keyword = 0;
  std::size_t gen_nonkeyword = 0;
  std::size_t gen_navigational = 0;
  double gen_zipf_exponent = 1.5;
  std::uint64_t gen_zipf_max = 1000;

  // encoder architecture
  nn::EncoderConfig encoder;

  // training
  RetrieverTrainConfig retr;
  RerankTrainConfig rerank_cfg;

  // lexical baseline
  Bm25Config bm25;

  // pipeline
  std::size_t pipeline_k = 100;
  std::vector<std::size_t> eval_ks{5, 10, 15};
  std::size_t vocab_max = 50000;
  std::size_t chunk_size = 32;
  bool resume = false;
  std::string tag = "cascade";

  // subcommand-specific files
  std::string run_file;
  std::string run_in;
  std::string run_out;
  std::string scaling_csv;
  std::vector<std::size_t> sizes;
};

std::string fmt(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string fmt(float value) { return fmt(static_cast<double>(value)); }

void require_input(const std::string& path, const std::string& stage, const std::string& what) {
  if (path.empty()) {
    throw UsageError(stage + ": missing required " + what + " path (see --help)");
  }
  if (!fs::exists(path)) {
    throw DataError(stage + ": " + what + " file not found: " + path);
  }
}

// Fills defaults that live under the output directory when not overridden.
void resolve_paths(Options& opt) {
  const fs::path out(opt.out_dir);
  auto def = [&](std::string& slot, const char* name) {
    if (slot.empty()) slot = (out / name).string();
  };
  def(opt.logs, "logs.jsonl");
  def(opt.vocab_file, "vocab.txt");
  def(opt.retriever_pairs, "retriever-pairs.jsonl");
  def(opt.reranker_pairs, "reranker-pairs.jsonl");
  def(opt.instances, "instances.jsonl");
  def(opt.retriever_model, "retriever.mckp");
  def(opt.cross_model, "cross.mckp");
  def(opt.index, "index.medv");
  def(opt.run_file, "run-retriever.txt");
  def(opt.run_out, "run-reranked.txt");
  def(opt.scaling_csv, "scaling.csv");
}

// qid <TAB> query text, one per line.
std::map<std::string, std::string> load_queries_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected `qid<TAB>query text`");
    }
    const std::string qid = line.substr(0, tab);
    if (!out.emplace(qid, line.substr(tab + 1)).second) {
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate query id " + qid);
    }
  }
  return out;
}

Vocab load_vocab_checked(const Options& opt, const std::string& stage) {
  require_input(opt.vocab_file, stage, "vocabulary");
  return Vocab::load(opt.vocab_file);
}

Corpus load_corpus_checked(const Options& opt, const std::string& stage) {
  require_input(opt.corpus, stage, "corpus");
  return Corpus::load_jsonl(opt.corpus);
}

// Appends step/lr/loss rows; the CSV is the training provenance record.
class LossLog {
public:
  explicit LossLog(const fs::path& path) : out_(path) {
    if (!out_) throw DataError("cannot open loss log for writing: " + path.string());
    out_ << "step,lr,loss\n";
  }
  void add(std::uint64_t step, float lr, float loss) {
    out_ << step << ',' << fmt(lr) << ',' << fmt(loss) << '\n';
  }

private:
  std::ofstream out_;
};

int cmd_gen_logs(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "gen-logs");
  require_input(opt.synonyms, "gen-logs", "synonym table");
  const SynonymTable synonyms = SynonymTable::load(opt.synonyms);

  LogGenConfig cfg;
  cfg.keyword_count = opt.gen_keyword;
  cfg.nonkeyword_count = opt.gen_nonkeyword;
  cfg.navigational_count = opt.gen_navigational;
  cfg.zipf_exponent = opt.gen_zipf_exponent;
  cfg.zipf_max = opt.gen_zipf_max;
  cfg.seed = derive_seed(opt.seed, "gen-logs");

  const std::vector<LogRecord> records = generate_logs(cfg, corpus, synonyms);
  save_logs(opt.logs, records);

  std::size_t keyword = 0, nonkeyword = 0, navigational = 0;
  for (const LogRecord& rec : records) {
    if (rec.navigational) {
      ++navigational;
    } else if (is_keyword_query(rec, corpus)) {
      ++keyword;
    } else {
      ++nonkeyword;
    }
  }
  std::cout << "keyword " << keyword << "\nnonkeyword " << nonkeyword << "\nnavigational "
            << navigational << "\ntotal " << records.size() << "\nlogs " << opt.logs << "\n";
  return 0;
}

int cmd_curate(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "curate");
  require_input(opt.logs, "curate", "log");
  const std::vector<LogRecord> records = load_logs(opt.logs);
  const std::vector<LogRecord> informational = filter_navigational(records);
  const TrainingSets sets = split_training_sets(informational, corpus);
  save_click_pairs(opt.retriever_pairs, sets.retriever);
  save_click_pairs(opt.reranker_pairs, sets.reranker);

  std::size_t keyword = 0;
  for (const LogRecord& rec : informational) {
    if (is_keyword_query(rec, corpus)) ++keyword;
  }
  std::cout << "records " << records.size() << "\nnavigational_dropped "
            << records.size() - informational.size() << "\ninformational "
            << informational.size() << "\nkeyword_queries " << keyword
            << "\nnonkeyword_queries " << informational.size() - keyword
            << "\nretriever_pairs " << sets.retriever.size() << "\nreranker_pairs "
            << sets.reranker.size() << "\nretriever_file " << opt.retriever_pairs
            << "\nreranker_file " << opt.reranker_pairs << "\n";
  return 0;
}

int cmd_build_vocab(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "build-vocab");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    texts.push_back(corpus.at(i).title + " " + corpus.at(i).abstract_text);
  }
  // Query text enters the vocabulary too, so synonym-substituted queries
  // do not collapse to unknown tokens.
  if (fs::exists(opt.logs)) {
    for (const LogRecord& rec : load_logs(opt.logs)) texts.push_back(rec.query);
  }
  const Vocab vocab = Vocab::build(texts, opt.vocab_max);
  vocab.save(opt.vocab_file);
  std::cout << "vocab_size " << vocab.size() << "\nvocab " << opt.vocab_file << "\n";
  return 0;
}

int cmd_train_retriever(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "train-retriever");
  const Vocab vocab = load_vocab_checked(opt, "train-retriever");
  require_input(opt.retriever_pairs, "train-retriever", "click-pair");
  const std::vector<ClickPair> pairs = load_click_pairs(opt.retriever_pairs);

  nn::EncoderConfig enc = opt.encoder;
  enc.vocab = static_cast<std::uint32_t>(vocab.size());
  enc.seed = derive_seed(opt.seed, "retriever-init");
  RetrieverTrainConfig cfg = opt.retr;
  cfg.seed = derive_seed(opt.seed, "retriever-train");

  LossLog loss_log(fs::path(opt.out_dir) / "retriever-loss.csv");
  TrainHooks hooks;
  hooks.on_step = [&](std::uint64_t step, float lr, float loss) {
    loss_log.add(step, lr, loss);
  };
  hooks.on_checkpoint = [&](std::uint64_t step, const nn::ParameterSet<float>& params) {
    const fs::path path =
        fs::path(opt.out_dir) / ("retriever-step-" + std::to_string(step) + ".mckp");
    nn::save_checkpoint(path, enc, params);
  };
  const nn::ParameterSet<float> params =
      train_retriever(pairs, corpus, vocab, enc, cfg, &hooks);
  nn::save_checkpoint(opt.retriever_model, enc, params);
  std::cout << "steps " << cfg.total_steps << "\npairs " << pairs.size() << "\nmodel "
            << opt.retriever_model << "\n";
  return 0;
}

int cmd_encode_corpus(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "encode-corpus");
  const Vocab vocab = load_vocab_checked(opt, "encode-corpus");
  require_input(opt.retriever_model, "encode-corpus", "retriever checkpoint");
  const nn::Checkpoint ckpt = nn::load_checkpoint(opt.retriever_model);

  EmbeddingMatrix out;
  out.dim = ckpt.config.hidden;
  out.ids.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) out.ids.push_back(corpus.at(i).id);
  out.values.assign(corpus.size() * out.dim, 0.0f);

  std::size_t done = 0;
  if (opt.resume && fs::exists(opt.index)) {
    const EmbeddingMatrix partial = load_index(opt.index);
    if (partial.dim != out.dim) {
      throw DataError("encode-corpus: existing index dimension " + std::to_string(partial.dim) +
                      " does not match checkpoint hidden size");
    }
    if (partial.rows() > corpus.size()) {
      throw DataError("encode-corpus: existing index has more rows than the corpus");
    }
    for (std::size_t i = 0; i < partial.rows(); ++i) {
      if (partial.ids[i] != out.ids[i]) {
        throw DataError("encode-corpus: existing index does not match corpus order at row " +
                        std::to_string(i));
      }
    }
    std::copy(partial.values.begin(), partial.values.end(), out.values.begin());
    done = partial.rows();
  }

  // Durable prefix after every slab: a crash or interrupt resumes from the
  // last completed slab instead of starting over.
  const std::size_t slab = std::max<std::size_t>(opt.chunk_size * 8, 1);
  const fs::path tmp = fs::path(opt.index).concat(".tmp");
  while (done < corpus.size()) {
    const std::size_t end = std::min(done + slab, corpus.size());
    encode_corpus_range(ckpt.config, ckpt.params, "denc.", vocab, corpus, done, end,
                        opt.chunk_size, out);
    EmbeddingMatrix prefix;
    prefix.dim = out.dim;
    prefix.ids.assign(out.ids.begin(), out.ids.begin() + static_cast<std::ptrdiff_t>(end));
    prefix.values.assign(out.values.begin(),
                         out.values.begin() + static_cast<std::ptrdiff_t>(end * out.dim));
    save_index(prefix, tmp);
    fs::rename(tmp, opt.index);
    done = end;
  }
  std::cout << "articles " << corpus.size() << "\ndim " << out.dim << "\nindex " << opt.index
            << "\n";
  return 0;
}

int cmd_mine_negatives(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "mine-negatives");
  const Vocab vocab = load_vocab_checked(opt, "mine-negatives");
  require_input(opt.retriever_model, "mine-negatives", "retriever checkpoint");
  require_input(opt.index, "mine-negatives", "index (run encode-corpus first)");
  require_input(opt.retriever_pairs, "mine-negatives", "retriever click-pair");
  require_input(opt.reranker_pairs, "mine-negatives", "re-ranker click-pair");
  const nn::Checkpoint ckpt = nn::load_checkpoint(opt.retriever_model);
  const EmbeddingMatrix index = load_index(opt.index);
  index.validate();

  // All clicked articles per query, from the full informational pair set.
  std::map<std::string, std::vector<std::string>> clicked;
  for (const ClickPair& p : load_click_pairs(opt.retriever_pairs)) {
    clicked[p.qid].push_back(p.doc_id);
  }
  const std::vector<ClickPair> to_mine = load_click_pairs(opt.reranker_pairs);
  const std::uint64_t mine_seed = derive_seed(opt.seed, "mine");

  std::vector<RerankInstance> instances;
  std::size_t skipped = 0;
  std::map<std::string, std::vector<float>> qvec_cache;
  for (const ClickPair& pair : to_mine) {
    auto it = qvec_cache.find(pair.qid);
    if (it == qvec_cache.end()) {
      it = qvec_cache
               .emplace(pair.qid, nn::encode_query_vec(ckpt.config, ckpt.params, "qenc.", vocab,
                                                       pair.query))
               .first;
    }
    const auto instance =
        mine_local_negatives(index, it->second, pair, clicked.at(pair.qid), opt.rerank_cfg,
                             mine_seed, [](const std::string& msg) {
                               std::cerr << "warning: " << msg << "\n";
                             });
    if (instance.has_value()) {
      instances.push_back(*instance);
    } else {
      ++skipped;
    }
  }
  save_rerank_instances(opt.instances, instances);
  std::cout << "mined " << instances.size() << "\nskipped " << skipped << "\ninstances "
            << opt.instances << "\n";
  return 0;
}

int cmd_train_reranker(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "train-reranker");
  const Vocab vocab = load_vocab_checked(opt, "train-reranker");
  require_input(opt.instances, "train-reranker", "mined-instance");
  const std::vector<RerankInstance> instances = load_rerank_instances(opt.instances);

  nn::EncoderConfig enc = opt.encoder;
  enc.vocab = static_cast<std::uint32_t>(vocab.size());
  enc.seed = derive_seed(opt.seed, "cross-init");
  RerankTrainConfig cfg = opt.rerank_cfg;
  cfg.seed = derive_seed(opt.seed, "cross-train");

  LossLog loss_log(fs::path(opt.out_dir) / "cross-loss.csv");
  TrainHooks hooks;
  hooks.on_step = [&](std::uint64_t step, float lr, float loss) {
    loss_log.add(step, lr, loss);
  };
  hooks.on_checkpoint = [&](std::uint64_t step, const nn::ParameterSet<float>& params) {
    const fs::path path = fs::path(opt.out_dir) / ("cross-step-" + std::to_string(step) + ".mckp");
    nn::save_checkpoint(path, enc, params);
  };
  const nn::ParameterSet<float> params =
      train_reranker(instances, corpus, vocab, enc, cfg, &hooks);
  nn::save_checkpoint(opt.cross_model, enc, params);
  std::cout << "steps " << cfg.total_steps << "\ninstances " << instances.size() << "\nmodel "
            << opt.cross_model << "\n";
  return 0;
}

int cmd_search(const Options& opt) {
  const Vocab vocab = load_vocab_checked(opt, "search");
  require_input(opt.retriever_model, "search", "retriever checkpoint");
  require_input(opt.index, "search", "index");
  require_input(opt.queries, "search", "query");
  const nn::Checkpoint ckpt = nn::load_checkpoint(opt.retriever_model);
  const EmbeddingMatrix index = load_index(opt.index);
  index.validate();

  Run run;
  for (const auto& [qid, text] : load_queries_tsv(opt.queries)) {
    const std::vector<float> qvec =
        nn::encode_query_vec(ckpt.config, ckpt.params, "qenc.", vocab, text);
    run.emplace(qid, mips_search(index, qvec, opt.pipeline_k, qid));
  }
  write_run(opt.run_file, run, opt.tag);
  std::cout << "queries " << run.size() << "\nk " << opt.pipeline_k << "\nrun " << opt.run_file
            << "\n";
  return 0;
}

int cmd_rerank(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "rerank");
  const Vocab vocab = load_vocab_checked(opt, "rerank");
  require_input(opt.cross_model, "rerank", "cross-encoder checkpoint");
  require_input(opt.run_in, "rerank", "candidate run");
  require_input(opt.queries, "rerank", "query");
  const nn::Checkpoint ckpt = nn::load_checkpoint(opt.cross_model);
  const std::map<std::string, std::string> queries = load_queries_tsv(opt.queries);

  Run out;
  for (const auto& [qid, list] : load_run(opt.run_in)) {
    const auto it = queries.find(qid);
    if (it == queries.end()) {
      throw DataError("rerank: run references query id " + qid + " absent from " + opt.queries);
    }
    out.emplace(qid, rerank(ckpt.config, ckpt.params, vocab, it->second, list, corpus));
  }
  write_run(opt.run_out, out, opt.tag + "-rerank");
  std::cout << "queries " << out.size() << "\nrun " << opt.run_out << "\n";
  return 0;
}

int cmd_eval(const Options& opt) {
  require_input(opt.run_file, "eval", "run");
  require_input(opt.qrels, "eval", "qrels");
  const Run run = load_run(opt.run_file);
  const Qrels qrels = load_qrels(opt.qrels);

  const fs::path per_query_path = fs::path(opt.out_dir) / "eval-per-query.csv";
  std::ofstream per_query(per_query_path);
  if (!per_query) throw DataError("cannot open " + per_query_path.string());
  per_query << "metric,k,qid,value\n";

  std::string summary = "metric,k,mean,per_query\n";
  for (const std::size_t k : opt.eval_ks) {
    const MetricReport ndcg = ndcg_at_k(run, qrels, k);
    const MetricReport map = map_at_k(run, qrels, k);
    summary += "ndcg," + std::to_string(k) + ',' + fmt(ndcg.mean) + ',' +
               per_query_path.string() + '\n';
    summary += "map," + std::to_string(k) + ',' + fmt(map.mean) + ',' +
               per_query_path.string() + '\n';
    for (const auto& [qid, value] : ndcg.per_query) {
      per_query << "ndcg," << k << ',' << qid << ',' << fmt(value) << '\n';
    }
    for (const auto& [qid, value] : map.per_query) {
      per_query << "map," << k << ',' << qid << ',' << fmt(value) << '\n';
    }
  }
  std::cout << summary;
  return 0;
}

int cmd_scaling_curve(const Options& opt) {
  const Corpus corpus = load_corpus_checked(opt, "scaling-curve");
  const Vocab vocab = load_vocab_checked(opt, "scaling-curve");
  require_input(opt.retriever_pairs, "scaling-curve", "click-pair");
  require_input(opt.queries, "scaling-curve", "query");
  require_input(opt.qrels, "scaling-curve", "qrels");
  if (opt.sizes.empty()) throw UsageError("scaling-curve: --sizes is required");

  const std::vector<ClickPair> pairs = load_click_pairs(opt.retriever_pairs);
  nn::EncoderConfig enc = opt.encoder;
  enc.vocab = static_cast<std::uint32_t>(vocab.size());
  enc.seed = derive_seed(opt.seed, "scaling-init");
  RetrieverTrainConfig cfg = opt.retr;
  cfg.seed = derive_seed(opt.seed, "scaling-train");

  const std::vector<ScalingPoint> points =
      scaling_curve(pairs, corpus, vocab, enc, cfg, opt.sizes, load_queries_tsv(opt.queries),
                    load_qrels(opt.qrels));

  std::string csv = "pairs,ndcg10\n";
  for (const ScalingPoint& p : points) {
    csv += std::to_string(p.pairs) + ',' + fmt(p.ndcg10) + '\n';
  }
  std::ofstream out(opt.scaling_csv);
  if (!out) throw DataError("cannot open " + opt.scaling_csv);
  out << csv;
  std::cout << csv;
  return 0;
}

// Provenance record: the full effective configuration, readable back via
// --config. Best-effort — an unwritable out dir fails later with a clear error.
void echo_effective_config(const Options& opt) {
  std::ofstream out(fs::path(opt.out_dir) / "effective-config.ini");
  if (!out) return;
  auto q = [](const std::string& s) { return '"' + s + '"'; };
  auto join = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t x : v) {
      if (!s.empty()) s += ',';
      s += std::to_string(x);
    }
    return s;
  };
  out << "seed=" << opt.seed << "\nthreads=" << opt.threads << "\nout-dir=" << q(opt.out_dir)
      << "\nrun=" << q(opt.run_file) << "\nrun-in=" << q(opt.run_in) << "\nrun-out="
      << q(opt.run_out) << "\nresume=" << (opt.resume ? "true" : "false") << "\n";
  if (!opt.sizes.empty()) out << "sizes=" << q(join(opt.sizes)) << "\n";
  out << "\n[paths]\ncorpus=" << q(opt.corpus) << "\nsynonyms=" << q(opt.synonyms) << "\nlogs="
      << q(opt.logs) << "\nvocab=" << q(opt.vocab_file) << "\nretriever_pairs="
      << q(opt.retriever_pairs) << "\nreranker_pairs=" << q(opt.reranker_pairs)
      << "\ninstances=" << q(opt.instances) << "\nretriever_model=" << q(opt.retriever_model)
      << "\ncross_model=" << q(opt.cross_model) << "\nindex=" << q(opt.index) << "\nqueries="
      << q(opt.queries) << "\nqrels=" << q(opt.qrels) << "\n";
  out << "\n[gen]\nkeyword=" << opt.gen_keyword << "\nnonkeyword=" << opt.gen_nonkeyword
      << "\nnavigational=" << opt.gen_navigational << "\nzipf_exponent="
      << fmt(opt.gen_zipf_exponent) << "\nzipf_max=" << opt.gen_zipf_max << "\n";
  out << "\n[encoder]\nhidden=" << opt.encoder.hidden << "\nlayers=" << opt.encoder.layers
      << "\nheads=" << opt.encoder.heads << "\nffn=" << opt.encoder.ffn << "\nmax_query="
      << opt.encoder.max_query << "\nmax_doc=" << opt.encoder.max_doc << "\n";
  out << "\n[retriever]\nbatch=" << opt.retr.batch << "\nalpha=" << fmt(opt.retr.alpha)
      << "\naccum=" << opt.retr.accum_steps << "\nsteps=" << opt.retr.total_steps
      << "\nwarmup=" << opt.retr.warmup_steps << "\nlr=" << fmt(opt.retr.lr)
      << "\ncheckpoint_every=" << opt.retr.checkpoint_every << "\n";
  out << "\n[reranker]\nnegatives=" << opt.rerank_cfg.negatives << "\nwindow_lo="
      << opt.rerank_cfg.window_lo << "\nwindow_hi=" << opt.rerank_cfg.window_hi << "\nbatch="
      << opt.rerank_cfg.batch << "\nsteps=" << opt.rerank_cfg.total_steps << "\nwarmup="
      << opt.rerank_cfg.warmup_steps << "\nlr=" << fmt(opt.rerank_cfg.lr)
      << "\ncheckpoint_every=" << opt.rerank_cfg.checkpoint_every << "\n";
  out << "\n[bm25]\nk1=" << fmt(opt.bm25.k1) << "\nb=" << fmt(opt.bm25.b) << "\n";
  out << "\n[pipeline]\nk=" << opt.pipeline_k << "\neval_ks=" << q(join(opt.eval_ks))
      << "\nvocab_max=" << opt.vocab_max << "\nchunk_size=" << opt.chunk_size << "\ntag="
      << q(opt.tag) << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage neural article retrieval: bi-encoder retriever plus "
               "cross-encoder re-ranker, trained from click logs"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", "cascade 1.0.0");
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<FlatConfig>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  Options opt;

  app.set_config("--config")->description("INI config file; flags override file values");
  app.add_option("--seed,--pipeline.seed", opt.seed, "global seed; all randomness derives from it");
  app.add_option("--threads", opt.threads, "worker cap (results are thread-count invariant)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir,--paths.out_dir", opt.out_dir, "artifact directory");

  app.add_option("--corpus,--paths.corpus", opt.corpus, "article JSONL file");
  app.add_option("--synonyms,--paths.synonyms", opt.synonyms, "synonym table JSON file");
  app.add_option("--logs,--paths.logs", opt.logs, "click-log JSONL file");
  app.add_option("--vocab-file,--paths.vocab", opt.vocab_file, "vocabulary file");
  app.add_option("--retriever-pairs,--paths.retriever_pairs", opt.retriever_pairs,
                 "retriever training pairs JSONL");
  app.add_option("--reranker-pairs,--paths.reranker_pairs", opt.reranker_pairs,
                 "re-ranker training pairs JSONL");
  app.add_option("--instances,--paths.instances", opt.instances, "mined instances JSONL");
  app.add_option("--retriever-model,--paths.retriever_model", opt.retriever_model,
                 "retriever checkpoint");
  app.add_option("--cross-model,--paths.cross_model", opt.cross_model,
                 "cross-encoder checkpoint");
  app.add_option("--index,--paths.index", opt.index, "document embedding index");
  app.add_option("--queries,--paths.queries", opt.queries, "query TSV (qid<TAB>text)");
  app.add_option("--qrels,--paths.qrels", opt.qrels, "TREC qrels file");

  app.add_option("--keyword,--gen.keyword", opt.gen_keyword, "keyword queries to generate");
  app.add_option("--nonkeyword,--gen.nonkeyword", opt.gen_nonkeyword,
                 "non-keyword queries to generate");
  app.add_option("--navigational,--gen.navigational", opt.gen_navigational,
                 "navigational queries to generate");
  app.add_option("--gen.zipf_exponent", opt.gen_zipf_exponent, "click-count Zipf exponent");
  app.add_option("--gen.zipf_max", opt.gen_zipf_max, "click-count cap");

  app.add_option("--encoder.hidden", opt.encoder.hidden, "embedding width");
  app.add_option("--encoder.layers", opt.encoder.layers, "transformer layers");
  app.add_option("--encoder.heads", opt.encoder.heads, "attention heads");
  app.add_option("--encoder.ffn", opt.encoder.ffn, "feed-forward width");
  app.add_option("--encoder.max_query", opt.encoder.max_query, "query token budget");
  app.add_option("--encoder.max_doc", opt.encoder.max_doc, "document token budget");

  app.add_option("--retriever.batch", opt.retr.batch, "in-batch size B");
  app.add_option("--retriever.alpha", opt.retr.alpha, "query-to-document loss share");
  app.add_option("--retriever.accum", opt.retr.accum_steps, "gradient accumulation steps");
  app.add_option("--retriever.steps", opt.retr.total_steps, "optimizer steps");
  app.add_option("--retriever.warmup", opt.retr.warmup_steps, "warmup steps");
  app.add_option("--retriever.lr", opt.retr.lr, "peak learning rate");
  app.add_option("--retriever.checkpoint_every", opt.retr.checkpoint_every,
                 "periodic checkpoint interval (0 = final only)");

  app.add_option("--reranker.negatives", opt.rerank_cfg.negatives, "mined negatives per query M");
  app.add_option("--reranker.window_lo", opt.rerank_cfg.window_lo, "mining window start rank e");
  app.add_option("--reranker.window_hi", opt.rerank_cfg.window_hi, "mining window end rank f");
  app.add_option("--reranker.batch", opt.rerank_cfg.batch, "instances per step");
  app.add_option("--reranker.steps", opt.rerank_cfg.total_steps, "optimizer steps");
  app.add_option("--reranker.warmup", opt.rerank_cfg.warmup_steps, "warmup steps");
  app.add_option("--reranker.lr", opt.rerank_cfg.lr, "peak learning rate");
  app.add_option("--reranker.checkpoint_every", opt.rerank_cfg.checkpoint_every,
                 "periodic checkpoint interval (0 = final only)");

  app.add_option("--bm25.k1", opt.bm25.k1, "BM25 k1");
  app.add_option("--bm25.b", opt.bm25.b, "BM25 length normalization b");

  app.add_option("--k,--pipeline.k", opt.pipeline_k, "candidate depth for search");
  app.add_option("--eval-ks,--pipeline.eval_ks", opt.eval_ks, "metric cutoffs")
      ->delimiter(',');
  app.add_option("--vocab-size,--pipeline.vocab_max", opt.vocab_max, "vocabulary cap");
  app.add_option("--chunk-size,--pipeline.chunk_size", opt.chunk_size,
                 "sequences per encoder forward pass")
      ->check(CLI::PositiveNumber);
  app.add_option("--tag,--pipeline.tag", opt.tag, "run tag for TREC output");

  CLI::App* gen = app.add_subcommand("gen-logs", "synthesize a click log");
  CLI::App* curate = app.add_subcommand(
      "curate", "filter navigational records and split training sets");
  CLI::App* vocab_cmd = app.add_subcommand("build-vocab", "build the token vocabulary");
  CLI::App* train_r = app.add_subcommand("train-retriever", "contrastive bi-encoder training");
  CLI::App* mine = app.add_subcommand("mine-negatives",
                                      "sample hard negatives from the retriever ranking");
  CLI::App* train_c = app.add_subcommand("train-reranker", "cross-encoder training");
  CLI::App* encode = app.add_subcommand("encode-corpus", "embed every article into the index");
  CLI::App* search_cmd = app.add_subcommand("search", "retrieve top-K per query into a TREC run");
  CLI::App* rerank_cmd = app.add_subcommand("rerank", "re-score a candidate run");
  CLI::App* eval_cmd = app.add_subcommand("eval", "NDCG/MAP report for a run");
  CLI::App* scaling = app.add_subcommand("scaling-curve",
                                         "NDCG@10 as a function of training-pair count");
  app.add_flag("--resume", opt.resume, "encode-corpus: continue a partial index");
  app.add_option("--run-in", opt.run_in, "rerank: candidate run file");
  app.add_option("--run-out", opt.run_out, "rerank: re-ranked run file");
  app.add_option("--sizes", opt.sizes, "scaling-curve: ascending pair-count prefixes")
      ->delimiter(',');
  app.add_option("--run,--paths.run", opt.run_file, "run file (search output / eval input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion") {
      return app.exit(e);
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::filesystem::create_directories(opt.out_dir);
    resolve_paths(opt);
    echo_effective_config(opt);
    if (*gen) return cmd_gen_logs(opt);
    if (*curate) return cmd_curate(opt);
    if (*vocab_cmd) return cmd_build_vocab(opt);
    if (*train_r) return cmd_train_retriever(opt);
    if (*mine) return cmd_mine_negatives(opt);
    if (*train_c) return cmd_train_reranker(opt);
    if (*encode) return cmd_encode_corpus(opt);
    if (*search_cmd) return cmd_search(opt);
    if (*rerank_cmd) return cmd_rerank(opt);
    if (*eval_cmd) return cmd_eval(opt);
    if (*scaling) return cmd_scaling_curve(opt);
    throw UsageError("no subcommand selected");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
