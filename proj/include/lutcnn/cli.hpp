/*!
  \file cli.hpp
  \brief Command-line front end: flag parsing and subcommand dispatch

  Exit status is 0 on success and the numeric value of the error class
  otherwise (see `error_kind`); a failed equivalence check exits with
  `verification_failed_status`, malformed flags with CLI11's codes.
*/

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lutcnn.hpp"

namespace lutcnn
{

inline constexpr int verification_failed_status = 10;

struct command_config
{
  std::string subcommand;
  std::string input;
  std::string data;
  std::string out;
  bool json = false;

  int k_lut = default_lut_inputs;
  std::optional<int> input_bits;
  int max_fan_in = default_fan_in_cap;

  // search
  std::vector<std::string> filters; /*!< "c,k,f" */
  int phi_max = 12;
  std::string orders = "both";
  std::optional<std::uint64_t> budget_luts;
  std::optional<std::size_t> top;
  std::optional<double> score_threshold;
  std::string template_name = "none";

  // simulate / verify / emit
  std::optional<int> window;
  std::uint64_t seed = 1;
  std::size_t count = 100;
};

/*! \brief Registers all subcommands and flags on `app`, writing into `cfg`. */
inline void build_parser( CLI::App& app, command_config& cfg )
{
  app.require_subcommand( 1 );
  auto common = [&]( CLI::App* sub ) {
    sub->add_option( "--k-lut", cfg.k_lut, "LUT input count" )->check( CLI::Range( 2, 16 ) );
    sub->add_option( "--input-bits", cfg.input_bits, "override the sample bit width b_in" )->check( CLI::Range( 1, 32 ) );
    sub->add_option( "--max-fan-in", cfg.max_fan_in, "largest truth table fan-in to enumerate" )->check( CLI::Range( 1, 30 ) );
  };
  auto model = [&]( CLI::App* sub ) { sub->add_option( "model", cfg.input, "model file (JSON)" )->required(); };
  auto window = [&]( CLI::App* sub ) {
    sub->add_option( "--window", cfg.window, "samples per window" )->check( CLI::PositiveNumber );
  };

  auto* validate = app.add_subcommand( "validate", "check a model against the IR invariants" );
  model( validate );

  auto* cost = app.add_subcommand( "cost", "itemized analytic LUT cost" );
  model( cost );
  common( cost );
  cost->add_flag( "--json", cfg.json, "print JSON instead of a table" );
  cost->add_option( "--out", cfg.out, "also write the JSON report here" );

  auto* search = app.add_subcommand( "search", "enumerate, score and rank split configurations" );
  common( search );
  search->add_option( "--filter", cfg.filters, "dense convolution to replace, as c,k,f" )->required();
  search->add_option( "--phi-max", cfg.phi_max, "fan-in bound per half" )->check( CLI::PositiveNumber );
  search->add_option( "--orders", cfg.orders, "kernel placement" )->check( CLI::IsMember( { "both", "kernel-first", "kernel-last" } ) );
  search->add_option( "--budget-luts", cfg.budget_luts, "drop configurations above this LUT cost" )->check( CLI::PositiveNumber );
  search->add_option( "--top", cfg.top, "keep the n best" )->check( CLI::PositiveNumber );
  search->add_option( "--score-threshold", cfg.score_threshold, "keep scores strictly above" )->check( CLI::NonNegativeNumber );
  search->add_option( "--template", cfg.template_name, "network used for the budget cost" )->check( CLI::IsMember( { "none", "ecg" } ) );
  search->add_flag( "--json", cfg.json, "print JSON instead of a table" );
  search->add_option( "--out", cfg.out, "write ranked configurations as JSON" );

  auto* compile = app.add_subcommand( "compile", "precompute truth tables and build the netlist" );
  model( compile );
  common( compile );
  window( compile );
  compile->add_option( "--out", cfg.out, "output directory" )->required();

  auto* simulate = app.add_subcommand( "simulate", "stream samples through the netlist" );
  common( simulate );
  simulate->add_option( "netlist", cfg.input, "model or netlist.json" )->required();
  simulate->add_option( "data", cfg.data, "one integer sample per line" )->required();
  window( simulate );
  simulate->add_option( "--out", cfg.out, "write per-window results as JSON" );

  auto* verify = app.add_subcommand( "verify", "randomized equivalence against the float reference" );
  model( verify );
  common( verify );
  window( verify );
  verify->add_option( "--seed", cfg.seed, "random seed" );
  verify->add_option( "--count", cfg.count, "number of windows" );
  verify->add_option( "--out", cfg.out, "write the report as JSON" );

  auto* emit = app.add_subcommand( "emit", "write VHDL and the compilation report" );
  model( emit );
  common( emit );
  window( emit );
  emit->add_option( "--seed", cfg.seed, "verification seed" );
  emit->add_option( "--count", cfg.count, "verification windows (0 skips)" );
  emit->add_option( "--out", cfg.out, "output directory" )->required();
}

namespace detail
{

inline network_spec load_cli_model( command_config const& cfg )
{
  auto spec = load_model( cfg.input );
  if ( cfg.input_bits )
    for ( auto& l : spec.layers )
      if ( auto* x = std::get_if<input_conv_layer>( &l ) )
        x->input_bits = *cfg.input_bits;
  return spec;
}

inline conv_params parse_filter( std::string const& text )
{
  std::vector<int> v;
  std::stringstream ss( text );
  std::string part;
  while ( std::getline( ss, part, ',' ) )
  {
    try
    {
      std::size_t used = 0;
      v.push_back( std::stoi( part, &used ) );
      if ( used != part.size() )
        throw std::invalid_argument( part );
    }
    catch ( std::exception const& )
    {
      throw error( error_kind::parse, "cli", "--filter expects c,k,f with integers, got '" + text + "'" );
    }
  }
  if ( v.size() != 3 || v[0] < 1 || v[1] < 1 || v[2] < 1 )
    throw error( error_kind::parse, "cli", "--filter expects three positive integers c,k,f, got '" + text + "'" );
  return { v[0], v[1], 1, v[2], 1 };
}

inline std::vector<std::int64_t> read_samples( std::string const& path )
{
  auto const text = read_text_file( path, "cli" );
  std::vector<std::int64_t> out;
  std::istringstream is( text );
  std::string line;
  std::size_t line_no = 0;
  while ( std::getline( is, line ) )
  {
    ++line_no;
    auto const first = line.find_first_not_of( " \t\r" );
    if ( first == std::string::npos )
      continue;
    auto const last = line.find_last_not_of( " \t\r" );
    auto const token = line.substr( first, last - first + 1 );
    try
    {
      std::size_t used = 0;
      auto const v = std::stoll( token, &used );
      if ( used != token.size() )
        throw std::invalid_argument( token );
      out.push_back( v );
    }
    catch ( std::exception const& )
    {
      throw error( error_kind::parse, "cli", path + ":" + std::to_string( line_no ) + ": expected an integer sample, got '" + token + "'" );
    }
  }
  return out;
}

inline void write_json( std::string const& path, nlohmann::json const& doc ) { write_text_file( path, doc.dump( 2 ) + "\n", "cli" ); }

inline int run_validate( command_config const& cfg, std::ostream& out )
{
  auto const spec = load_model( cfg.input );
  auto const violations = validate_network( spec );
  out << cfg.input << ": " << to_string( spec.phase ) << " network, " << spec.layers.size() << " layers\n";
  if ( violations.empty() )
  {
    out << "valid\n";
    return 0;
  }
  for ( auto const& v : violations )
    out << "  " << v << "\n";
  out << violations.size() << " violation(s)\n";
  return static_cast<int>( error_kind::structure );
}

inline int run_cost( command_config const& cfg, std::ostream& out )
{
  auto spec = load_cli_model( cfg );
  require_valid( spec, "cost_model" );
  if ( spec.phase == network_phase::training )
    spec = reorder_for_deployment( spec );
  auto const report = network_cost( spec, cfg.k_lut );
  auto const doc = to_json( report );
  if ( !cfg.out.empty() )
    write_json( cfg.out, doc );
  if ( cfg.json )
  {
    out << doc.dump( 2 ) << "\n";
    return 0;
  }
  out << std::left << std::setw( 16 ) << "item" << std::right << std::setw( 8 ) << "fan-in" << std::setw( 9 ) << "outputs" << std::setw( 10 ) << "luts" << "\n";
  for ( auto const& it : report.items )
    out << std::left << std::setw( 16 ) << it.name << std::right << std::setw( 8 ) << it.fan_in << std::setw( 9 ) << it.outputs << std::setw( 10 ) << it.luts.value << "\n";
  out << std::left << std::setw( 33 ) << "total" << std::right << std::setw( 10 ) << report.total.value << "\n";
  return 0;
}

inline int run_search( command_config const& cfg, std::ostream& out )
{
  std::vector<kernel_order> orders;
  if ( cfg.orders != "kernel-last" )
    orders.push_back( kernel_order::kernel_first );
  if ( cfg.orders != "kernel-first" )
    orders.push_back( kernel_order::kernel_last );

  nlohmann::json doc = nlohmann::json::array();
  for ( auto const& text : cfg.filters )
  {
    auto const f0 = parse_filter( text );
    std::vector<scored_config> scored;
    for ( auto const& cfg_pair : find_filter_pairs( f0, cfg.phi_max, orders ) )
    {
      std::optional<lut_count> network;
      if ( cfg.template_name == "ecg" )
      {
        if ( f0.c != f0.f )
          throw error( error_kind::domain, "cli", "the ecg template needs c = f, got filter " + text );
        auto const net = ecg_network( ecg_first_block( f0.c ), cfg_pair, cfg.input_bits.value_or( 12 ) );
        network = network_cost( reorder_for_deployment( net ), cfg.k_lut ).total;
      }
      scored.push_back( score_config( cfg_pair, cfg.k_lut, network ) );
    }
    std::size_t const enumerated = scored.size();
    rank_options opts;
    if ( cfg.budget_luts )
      opts.budget = lut_count{ *cfg.budget_luts };
    opts.top = cfg.top;
    opts.threshold = cfg.score_threshold;
    auto const ranked = rank_configs( std::move( scored ), opts );

    nlohmann::json entry;
    entry["filter"] = { { "c", f0.c }, { "k", f0.k }, { "f", f0.f } };
    entry["phi_max"] = cfg.phi_max;
    entry["enumerated"] = enumerated;
    entry["configs"] = nlohmann::json::array();
    for ( auto const& s : ranked )
      entry["configs"].push_back( to_json( s ) );
    doc.push_back( entry );

    if ( !cfg.json )
    {
      out << "filter c=" << f0.c << " k=" << f0.k << " f=" << f0.f << ", phi_max " << cfg.phi_max << ": " << enumerated
          << " configurations, " << ranked.size() << " kept\n";
      out << std::right << std::setw( 5 ) << "rank" << "  " << std::left << std::setw( 24 ) << "tuple" << std::right << std::setw( 6 )
          << "phi_a" << std::setw( 6 ) << "phi_b" << std::setw( 8 ) << "clc" << std::setw( 10 ) << "score" << std::setw( 8 ) << "block"
          << std::setw( 9 ) << "network" << "\n";
      for ( std::size_t i = 0; i < ranked.size(); ++i )
      {
        auto const& s = ranked[i];
        std::ostringstream score;
        score << std::fixed << std::setprecision( 4 ) << s.score;
        out << std::right << std::setw( 5 ) << i + 1 << "  " << std::left << std::setw( 24 ) << to_string( s.cfg ) << std::right
            << std::setw( 6 ) << s.phi_alpha << std::setw( 6 ) << s.phi_beta << std::setw( 8 ) << to_string( s.clc ) << std::setw( 10 )
            << score.str() << std::setw( 8 ) << s.block_cost.value << std::setw( 9 ) << s.analytic_cost.value << "\n";
      }
    }
  }
  if ( cfg.json )
    out << doc.dump( 2 ) << "\n";
  if ( !cfg.out.empty() )
    write_json( cfg.out, doc );
  return 0;
}

inline compiled_network compile_cli_model( command_config const& cfg )
{
  compile_options opts;
  opts.k_lut = cfg.k_lut;
  opts.fan_in_cap = cfg.max_fan_in;
  opts.window_length = cfg.window;
  return compile_network( load_cli_model( cfg ), opts );
}

inline int run_compile( command_config const& cfg, std::ostream& out )
{
  auto const c = compile_cli_model( cfg );
  std::filesystem::path const dir( cfg.out );
  std::error_code ec;
  std::filesystem::create_directories( dir, ec );
  if ( ec )
    throw error( error_kind::io, "cli", "cannot create " + dir.string() + ": " + ec.message() );
  for ( auto const& t : c.tables )
  {
    write_text_file( ( dir / ( t.name() + ".lutt" ) ).string(), serialize_table( t ), "cli" );
    write_text_file( ( dir / ( t.name() + ".hex" ) ).string(), hex_dump( t ), "cli" );
  }
  write_text_file( ( dir / "netlist.json" ).string(), netlist_to_string( c.netlist ), "cli" );
  for ( auto const& t : c.tables )
    out << std::left << std::setw( 16 ) << t.name() << " phi " << std::setw( 3 ) << t.phi() << " outputs " << t.m() << "\n";
  out << "stages " << c.netlist.stages.size() << ", luts " << c.netlist.lut_count() << ", pipeline depth " << c.netlist.pipeline_depth()
      << ", receptive field " << receptive_field( c.plan ) << "\n";
  out << "wrote " << c.tables.size() << " tables and netlist.json to " << dir.string() << "\n";
  return 0;
}

inline int run_simulate( command_config const& cfg, std::ostream& out )
{
  auto const text = read_text_file( cfg.input, "cli" );
  lut_netlist n;
  if ( text.find( "\"lutcnn-netlist\"" ) != std::string::npos )
    n = netlist_from_string( text );
  else
  {
    compile_options opts;
    opts.k_lut = cfg.k_lut;
    opts.fan_in_cap = cfg.max_fan_in;
    auto spec = model_from_string( text );
    if ( cfg.input_bits )
      for ( auto& l : spec.layers )
        if ( auto* x = std::get_if<input_conv_layer>( &l ) )
          x->input_bits = *cfg.input_bits;
    n = compile_network( spec, opts ).netlist;
  }
  auto const samples = read_samples( cfg.data );
  std::size_t const length = cfg.window ? static_cast<std::size_t>( *cfg.window ) : samples.size();
  if ( samples.empty() || samples.size() % length != 0 )
    throw error( error_kind::input, "cli",
                 std::to_string( samples.size() ) + " samples do not split into windows of " + std::to_string( length ) );
  std::vector<std::vector<std::int64_t>> windows;
  for ( std::size_t first = 0; first < samples.size(); first += length )
    windows.emplace_back( samples.begin() + static_cast<std::ptrdiff_t>( first ), samples.begin() + static_cast<std::ptrdiff_t>( first + length ) );
  auto const results = simulate_windows( n, windows, std::max( 1u, std::thread::hardware_concurrency() ) );
  nlohmann::json doc = nlohmann::json::array();
  for ( auto const& r : results )
  {
    out << ( r.decision ? 1 : 0 ) << "\n";
    doc.push_back( { { "decision", r.decision ? 1 : 0 }, { "cycles", r.cycles } } );
  }
  if ( !cfg.out.empty() )
    write_json( cfg.out, { { "window_length", length }, { "pipeline_depth", n.pipeline_depth() }, { "windows", doc } } );
  return 0;
}

inline verify_options cli_verify_options( command_config const& cfg )
{
  verify_options v;
  v.seed = cfg.seed;
  v.count = cfg.count;
  v.window_length = cfg.window;
  v.threads = std::max( 1u, std::thread::hardware_concurrency() );
  return v;
}

inline int run_verify( command_config const& cfg, std::ostream& out )
{
  auto const spec = load_cli_model( cfg );
  auto const c = compile_cli_model( cfg );
  auto const report = verify_equivalence( spec, c.netlist, cli_verify_options( cfg ) );
  auto const doc = to_json( report );
  out << doc.dump( 2 ) << "\n";
  if ( !cfg.out.empty() )
    write_json( cfg.out, doc );
  return report.passed() ? 0 : verification_failed_status;
}

inline int run_emit( command_config const& cfg, std::ostream& out )
{
  auto const spec = load_cli_model( cfg );
  auto const c = compile_cli_model( cfg );
  int const window = cfg.window.value_or( receptive_field( c.plan ) );
  std::optional<verification_report> report;
  if ( cfg.count > 0 )
    report = verify_equivalence( spec, c.netlist, cli_verify_options( cfg ) );
  emit_options eo;
  eo.testbench_window = window;
  auto const bundle = emit_vhdl( c.netlist, eo );
  write_bundle( bundle, cfg.out );
  report_inputs ri{ spec, std::nullopt, &c.netlist, report ? &*report : nullptr, static_cast<std::uint64_t>( window ), cfg.k_lut };
  write_json( ( std::filesystem::path( cfg.out ) / "report.json" ).string(), emit_report( ri ) );
  for ( auto const& f : bundle.files )
    out << f.name << "\n";
  out << "report.json\n";
  if ( report && !report->passed() )
  {
    out << "verification failed: " << report->mismatches << " mismatching window(s)\n";
    return verification_failed_status;
  }
  return 0;
}

} // namespace detail

/*! \brief Executes a parsed command; throws `lutcnn::error` on failure. */
inline int run( command_config const& cfg, std::ostream& out )
{
  if ( cfg.subcommand == "validate" )
    return detail::run_validate( cfg, out );
  if ( cfg.subcommand == "cost" )
    return detail::run_cost( cfg, out );
  if ( cfg.subcommand == "search" )
    return detail::run_search( cfg, out );
  if ( cfg.subcommand == "compile" )
    return detail::run_compile( cfg, out );
  if ( cfg.subcommand == "simulate" )
    return detail::run_simulate( cfg, out );
  if ( cfg.subcommand == "verify" )
    return detail::run_verify( cfg, out );
  if ( cfg.subcommand == "emit" )
    return detail::run_emit( cfg, out );
  throw error( error_kind::domain, "cli", "unknown subcommand '" + cfg.subcommand + "'" );
}

/*! \brief Parses `argv`, runs the command and maps errors to exit codes. */
inline int cli_main( int argc, char const* const* argv, std::ostream& out, std::ostream& err )
{
  CLI::App app{ "lutcnn: precomputed LUT networks from binarized 1D CNNs" };
  command_config cfg;
  build_parser( app, cfg );
  try
  {
    app.parse( argc, argv );
    cfg.subcommand = app.get_subcommands().front()->get_name();
  }
  catch ( CLI::ParseError const& e )
  {
    return app.exit( e, out, err );
  }
  try
  {
    return run( cfg, out );
  }
  catch ( error const& e )
  {
    err << e.what() << "\n";
    return static_cast<int>( e.kind() );
  }
}

} // namespace lutcnn
