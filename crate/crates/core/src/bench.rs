//! Embedded benchmark corpus: the litmus programs (colours, stack) plus the
//! classic synchronisation benchmarks, all expressed in mini-SCOOP.

const COLOURS: &str = "
-- Two clients set the colours of two shared holders inside separate blocks.
-- The order guarantees make mixed colour pairs unobservable: both Green (1)
-- or both Indigo (2).
class COLOUR_HOLDER
  colour: INTEGER
  set_colour (c: INTEGER) do colour := c end
  get_colour: INTEGER do Result := colour end
end

class PAINTER
  x: separate COLOUR_HOLDER
  y: separate COLOUR_HOLDER
  make (a_x, a_y: separate COLOUR_HOLDER)
    do
      x := a_x
      y := a_y
    end
  run
    do
      separate x, y do
        x.set_colour (1)
        y.set_colour (1)
      end
    end
end

class COPIER
  x: separate COLOUR_HOLDER
  y: separate COLOUR_HOLDER
  make (a_x, a_y: separate COLOUR_HOLDER)
    do
      x := a_x
      y := a_y
    end
  run
    local
      a_colour: INTEGER
    do
      separate x, y do
        x.set_colour (2)
        a_colour := x.get_colour
        y.set_colour (a_colour)
      end
    end
end

class APPLICATION
  make
    local
      x: separate COLOUR_HOLDER
      y: separate COLOUR_HOLDER
      painter: separate PAINTER
      copier: separate COPIER
    do
      create x
      create y
      create painter.make (x, y)
      create copier.make (x, y)
      launch_painter (painter)
      launch_copier (copier)
    end
  launch_painter (a_painter: separate PAINTER)
    do
      a_painter.run
    end
  launch_copier (a_copier: separate COPIER)
    do
      a_copier.run
    end
end
";

const STACK: &str = "
-- One client pushes 1..7 in a single separate block while another pushes 8
-- and reads the top: 8 can never land between 1 and 7, and the observed top
-- is always 8.
class STACK_HOLDER
  count: INTEGER
  top_value: INTEGER
  push (v: INTEGER)
    do
      count := count + 1
      top_value := v
    end
  top: INTEGER
    do
      Result := top_value
    end
end

class BULK_PUSHER
  stack: separate STACK_HOLDER
  make (a_stack: separate STACK_HOLDER) do stack := a_stack end
  run
    do
      separate stack do
        stack.push (1)
        stack.push (2)
        stack.push (3)
        stack.push (4)
        stack.push (5)
        stack.push (6)
        stack.push (7)
      end
    end
end

class TOP_READER
  stack: separate STACK_HOLDER
  observed: INTEGER
  make (a_stack: separate STACK_HOLDER) do stack := a_stack end
  run
    do
      separate stack do
        stack.push (8)
        observed := stack.top
      end
    end
end

class APPLICATION
  make
    local
      s: separate STACK_HOLDER
      pusher: separate BULK_PUSHER
      reader: separate TOP_READER
    do
      create s
      create pusher.make (s)
      create reader.make (s)
      launch_pusher (pusher)
      launch_reader (reader)
    end
  launch_pusher (p: separate BULK_PUSHER) do p.run end
  launch_reader (r: separate TOP_READER) do r.run end
end
";

const PRODUCER_CONSUMER: &str = "
-- Single-element buffer with wait conditions on fullness/emptiness.
class BUFFER
  count: INTEGER
  capacity: INTEGER
  stored: INTEGER
  make (a_capacity: INTEGER)
    do
      capacity := a_capacity
    end
  put (an_element: INTEGER)
    do
      count := count + 1
      stored := an_element
    end
  consume
    do
      count := count - 1
    end
  last_consumed_item: INTEGER
    do
      Result := stored
    end
  is_full: BOOLEAN
    do
      Result := count >= capacity
    end
  is_empty: BOOLEAN
    do
      Result := count <= 0
    end
end

class PRODUCER
  buffer: separate BUFFER
  rounds: INTEGER
  make (a_buffer: separate BUFFER, a_rounds: INTEGER)
    do
      buffer := a_buffer
      rounds := a_rounds
    end
  run
    do
      from until rounds < 1 loop
        put_on_buffer (buffer, rounds)
        rounds := rounds - 1
      end
    end
  put_on_buffer (a_buffer: separate BUFFER, an_element: INTEGER)
    require
      not a_buffer.is_full
    do
      a_buffer.put (an_element)
    end
end

class CONSUMER
  buffer: separate BUFFER
  rounds: INTEGER
  last: INTEGER
  make (a_buffer: separate BUFFER, a_rounds: INTEGER)
    do
      buffer := a_buffer
      rounds := a_rounds
    end
  run
    do
      from until rounds < 1 loop
        last := remove_from_buffer (buffer)
        rounds := rounds - 1
      end
    end
  remove_from_buffer (a_buffer: separate BUFFER): INTEGER
    require
      not a_buffer.is_empty
    do
      a_buffer.consume
      Result := a_buffer.last_consumed_item
    end
end

class APPLICATION
  make
    local
      buffer: separate BUFFER
      producer: separate PRODUCER
      consumer: separate CONSUMER
    do
      create buffer.make (1)
      create producer.make (buffer, @ROUNDS@)
      create consumer.make (buffer, @ROUNDS@)
      launch_producer (producer)
      launch_consumer (consumer)
    end
  launch_producer (p: separate PRODUCER) do p.run end
  launch_consumer (c: separate CONSUMER) do c.run end
end
";

const BARBERSHOP: &str = "
-- One barber, one chair, two customers; seating and serving synchronise via
-- wait conditions on the shop state.
class SHOP
  waiting: INTEGER
  chairs: INTEGER
  make (a_chairs: INTEGER) do chairs := a_chairs end
  enter do waiting := waiting + 1 end
  leave_chair do waiting := waiting - 1 end
  has_free_chair: BOOLEAN do Result := waiting < chairs end
  someone_waiting: BOOLEAN do Result := waiting > 0 end
end

class BARBER
  shop: separate SHOP
  cuts: INTEGER
  remaining: INTEGER
  make (a_shop: separate SHOP, a_customers: INTEGER)
    do
      shop := a_shop
      remaining := a_customers
    end
  run
    do
      from until remaining < 1 loop
        serve_next (shop)
        remaining := remaining - 1
      end
    end
  serve_next (a_shop: separate SHOP)
    require
      a_shop.someone_waiting
    do
      a_shop.leave_chair
      cuts := cuts + 1
    end
end

class CUSTOMER
  shop: separate SHOP
  make (a_shop: separate SHOP) do shop := a_shop end
  run
    do
      take_seat (shop)
    end
  take_seat (a_shop: separate SHOP)
    require
      a_shop.has_free_chair
    do
      a_shop.enter
    end
end

class APPLICATION
  make
    local
      shop: separate SHOP
      barber: separate BARBER
      c1: separate CUSTOMER
      c2: separate CUSTOMER
    do
      create shop.make (1)
      create barber.make (shop, 2)
      create c1.make (shop)
      create c2.make (shop)
      launch_barber (barber)
      launch_customer (c1)
      launch_customer (c2)
    end
  launch_barber (b: separate BARBER) do b.run end
  launch_customer (c: separate CUSTOMER) do c.run end
end
";

const DINING_SAVAGES: &str = "
-- Savages eat servings from a shared pot; the cook refills it when empty.
class POT
  servings: INTEGER
  capacity: INTEGER
  make (a_capacity: INTEGER) do capacity := a_capacity end
  take_serving do servings := servings - 1 end
  refill do servings := capacity end
  has_food: BOOLEAN do Result := servings > 0 end
  is_empty: BOOLEAN do Result := servings <= 0 end
end

class SAVAGE
  pot: separate POT
  meals: INTEGER
  make (a_pot: separate POT, a_meals: INTEGER)
    do
      pot := a_pot
      meals := a_meals
    end
  run
    do
      from until meals < 1 loop
        eat_from_pot (pot)
        meals := meals - 1
      end
    end
  eat_from_pot (a_pot: separate POT)
    require
      a_pot.has_food
    do
      a_pot.take_serving
    end
end

class COOK
  pot: separate POT
  refills: INTEGER
  make (a_pot: separate POT, a_refills: INTEGER)
    do
      pot := a_pot
      refills := a_refills
    end
  run
    do
      from until refills < 1 loop
        refill_pot (pot)
        refills := refills - 1
      end
    end
  refill_pot (a_pot: separate POT)
    require
      a_pot.is_empty
    do
      a_pot.refill
    end
end

class APPLICATION
  make
    local
      pot: separate POT
      cook: separate COOK
      s1: separate SAVAGE
      s2: separate SAVAGE
    do
      create pot.make (2)
      create cook.make (pot, 1)
      create s1.make (pot, 1)
      create s2.make (pot, 1)
      launch_cook (cook)
      launch_savage (s1)
      launch_savage (s2)
    end
  launch_cook (c: separate COOK) do c.run end
  launch_savage (s: separate SAVAGE) do s.run end
end
";

const BANK_TRANSFER: &str = "
-- Two tellers transfer between the same two accounts in opposite directions;
-- under D-SCOOP the ordered prelock acquisition keeps this deadlock-free.
class ACCOUNT
  balance: INTEGER
  make (an_amount: INTEGER) do balance := an_amount end
  set_balance (an_amount: INTEGER) do balance := an_amount end
  get_balance: INTEGER do Result := balance end
end

class TELLER
  source: separate ACCOUNT
  target: separate ACCOUNT
  amount: INTEGER
  make (a_source, a_target: separate ACCOUNT, an_amount: INTEGER)
    do
      source := a_source
      target := a_target
      amount := an_amount
    end
  run
    do
      transfer (source, target, amount)
    end
  transfer (a_source, a_target: separate ACCOUNT, an_amount: INTEGER)
    local
      available: INTEGER
    do
      available := a_source.get_balance
      if available >= an_amount then
        a_source.set_balance (available - an_amount)
        available := a_target.get_balance
        a_target.set_balance (available + an_amount)
      end
    end
end

class APPLICATION
  make
    local
      first_account: separate ACCOUNT
      second_account: separate ACCOUNT
      t1: separate TELLER
      t2: separate TELLER
    do
      create first_account.make (10)
      create second_account.make (10)
      create t1.make (first_account, second_account, 3)
      create t2.make (second_account, first_account, 5)
      launch_teller (t1)
      launch_teller (t2)
    end
  launch_teller (t: separate TELLER) do t.run end
end
";

/// Dining philosophers, parameterised over count, rounds, fork-acquisition
/// style (eager = both at once, lazy = nested blocks), and whether the
/// separate blocks issue commands on the forks.
fn dining_philosophers(n: u32, rounds: u32, lazy: bool, commands: bool) -> String {
    let fork_uses = if commands {
        "      left.use\n      right.use\n"
    } else {
        ""
    };
    let (live_call, eat_methods) = if lazy {
        (
            "bad_eat",
            format!(
                "  bad_eat
    do
      pickup_left_then_right (left_fork)
    end
  pickup_left_then_right (left: separate FORK)
    do
      pickup_right_and_eat (left, right_fork)
    end
  pickup_right_and_eat (left, right: separate FORK)
    do
{fork_uses}    end
"
            ),
        )
    } else {
        (
            "eat (left_fork, right_fork)",
            format!(
                "  eat (left, right: separate FORK)
    do
{fork_uses}    end
"
            ),
        )
    };
    format!(
        "
-- {n} philosophers, {rounds} round(s); {style} fork acquisition, {cmd}.
class FORK
  use_count: INTEGER
  use do use_count := use_count + 1 end
end

class PHILOSOPHER
  times_to_eat: INTEGER
  left_fork: separate FORK
  right_fork: separate FORK
  make (a_left, a_right: separate FORK, a_rounds: INTEGER)
    do
      left_fork := a_left
      right_fork := a_right
      times_to_eat := a_rounds
    end
  live
    do
      from until times_to_eat < 1 loop
        {live_call}
        times_to_eat := times_to_eat - 1
      end
    end
{eat_methods}end

class APPLICATION
  make
    local
      first_fork: separate FORK
      left_fork: separate FORK
      right_fork: separate FORK
      a_philosopher: separate PHILOSOPHER
      i: INTEGER
    do
      from
        i := 1
        create first_fork
        left_fork := first_fork
      until
        i > {n}
      loop
        if i < {n} then
          create right_fork
        else
          right_fork := first_fork
        end
        create a_philosopher.make (left_fork, right_fork, {rounds})
        launch_philosopher (a_philosopher)
        left_fork := right_fork
        i := i + 1
      end
    end
  launch_philosopher (philosopher: separate PHILOSOPHER)
    do
      philosopher.live
    end
end
",
        style = if lazy { "lazy (nested)" } else { "eager (simultaneous)" },
        cmd = if commands { "commands on forks" } else { "no commands" },
    )
}

pub const BENCHMARK_IDS: &[&str] = &[
    "colours",
    "stack",
    "dp_eager_2",
    "dp_eager_3",
    "dp_lazy_2",
    "dp_lazy_3",
    "dp_eager_nocmd_2",
    "dp_eager_nocmd_3",
    "dp_lazy_nocmd_2",
    "dp_lazy_nocmd_3",
    "producer_consumer_5",
    "producer_consumer_20",
    "barbershop",
    "dining_savages",
    "bank_transfer",
];

/// Source text of a benchmark by id.
pub fn source(id: &str) -> Option<String> {
    let text = match id {
        "colours" => COLOURS.to_string(),
        "stack" => STACK.to_string(),
        "dp_eager_2" => dining_philosophers(2, 1, false, true),
        "dp_eager_3" => dining_philosophers(3, 1, false, true),
        "dp_lazy_2" => dining_philosophers(2, 1, true, true),
        "dp_lazy_3" => dining_philosophers(3, 1, true, true),
        "dp_eager_nocmd_2" => dining_philosophers(2, 1, false, false),
        "dp_eager_nocmd_3" => dining_philosophers(3, 1, false, false),
        "dp_lazy_nocmd_2" => dining_philosophers(2, 1, true, false),
        "dp_lazy_nocmd_3" => dining_philosophers(3, 1, true, false),
        "producer_consumer_5" => PRODUCER_CONSUMER.replace("@ROUNDS@", "5"),
        "producer_consumer_20" => PRODUCER_CONSUMER.replace("@ROUNDS@", "20"),
        "barbershop" => BARBERSHOP.to_string(),
        "dining_savages" => DINING_SAVAGES.to_string(),
        "bank_transfer" => BANK_TRANSFER.to_string(),
        _ => return None,
    };
    Some(text)
}

/// Dining-philosophers source for arbitrary parameters (used by tests).
pub fn dining_philosophers_source(n: u32, rounds: u32, lazy: bool, commands: bool) -> String {
    dining_philosophers(n, rounds, lazy, commands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile_source;

    #[test]
    fn every_benchmark_compiles_clean() {
        for id in BENCHMARK_IDS {
            let src = source(id).expect("known id");
            if let Err(diags) = compile_source(&src) {
                let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
                panic!("benchmark {id} failed to compile:\n{}", msgs.join("\n"));
            }
        }
    }
}
