//! Deterministic synthetic log corpora for tests and benchmarks: sixteen
//! generator styles modeled on common public log formats, a small
//! mixed-services sample used throughout the docs, and a fuzz-file
//! generator producing adversarial inputs for roundtrip testing.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// The sixteen corpus styles.
pub const DATASET_STYLES: &[&str] = &[
    "android",
    "apache",
    "bgl",
    "hadoop",
    "hdfs",
    "healthapp",
    "hpc",
    "linux",
    "mac",
    "openssh",
    "openstack",
    "proxifier",
    "spark",
    "thunderbird",
    "windows",
    "zookeeper",
];

/// A small fixed log snippet mixing four services; the authentication lines
/// carry strongly correlated variable combinations and exactly one rare
/// remote host.
pub fn mixed_services_sample() -> Vec<u8> {
    let lines = [
        "Jun 14 15:16:01 combo kernel: audit(1119799950.864:693295): initializing netlink socket (disabled)",
        "Jun 14 15:16:01 combo kernel: audit(1119799950.960:693296): initializing netlink socket (disabled)",
        "Jun 14 15:16:01 combo httpd[20882]: request complete transaction_id=5001",
        "Jun 14 15:16:02 combo database: query executed transaction_id=5001",
        "Jun 14 15:16:02 combo sshd(pam_unix)[20897]: authentication failure; user=test1 rhost=pokemon1.cs.edu uid=509 euid=0",
        "Jun 14 15:16:02 combo sshd(pam_unix)[20898]: authentication failure; user=test1 rhost=srv2.alfahost.nl uid=509 euid=0",
        "Jun 14 15:16:02 combo sshd(pam_unix)[20899]: authentication failure; user=test1 rhost=pokemon1.cs.edu uid=509 euid=0",
        "Jun 14 15:16:03 combo httpd[20882]: request complete transaction_id=5002",
        "Jun 14 15:16:03 combo sshd(pam_unix)[20900]: authentication failure; user=root rhost=pc180.edu.tw uid=0 euid=0",
        "Jun 14 15:16:03 combo sshd(pam_unix)[20901]: authentication failure; user=root rhost=julia.arkos.de uid=0 euid=0",
        "Jun 14 15:16:04 combo sshd(pam_unix)[20902]: authentication failure; user=root rhost=pc180.edu.tw uid=0 euid=0",
        "Jun 14 15:16:04 combo sshd(pam_unix)[20903]: authentication failure; user=root rhost=julia.arkos.de uid=0 euid=0",
    ];
    let mut out = String::new();
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    out.into_bytes()
}

struct Clock {
    secs: u64,
    rng: ChaCha8Rng,
}

impl Clock {
    fn new(seed: u64, start: u64) -> Self {
        Self {
            secs: start,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6c0c),
        }
    }

    fn tick(&mut self) -> u64 {
        self.secs += self.rng.gen_range(0..3);
        self.secs
    }

    fn hms(&mut self) -> String {
        let s = self.tick() % 86_400;
        format!("{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

/// Generate `lines` log lines in the named style. Identical arguments
/// always produce identical bytes.
pub fn dataset_sample(style: &str, lines: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(hash_style(style)));
    let mut clock = Clock::new(seed, 54_000);
    let mut out = String::new();
    let mut counters = [0u64; 4];
    for i in 0..lines {
        let line = match style {
            "android" => android_line(&mut rng, i),
            "apache" => apache_line(&mut rng, &mut clock, i),
            "bgl" => bgl_line(&mut rng, i),
            "hadoop" => hadoop_line(&mut rng, i),
            "hdfs" => hdfs_line(&mut rng, &mut counters, i),
            "healthapp" => healthapp_line(&mut rng, &mut counters, i),
            "hpc" => hpc_line(&mut rng, i),
            "linux" => linux_line(&mut rng, &mut clock, &mut counters, i),
            "mac" => mac_line(&mut rng, &mut clock),
            "openssh" => openssh_line(&mut rng, &mut clock, &mut counters),
            "openstack" => openstack_line(&mut rng, i),
            "proxifier" => proxifier_line(&mut rng, &mut clock),
            "spark" => spark_line(&mut rng, i),
            "thunderbird" => thunderbird_line(&mut rng, &mut clock, &mut counters, i),
            "windows" => windows_line(&mut rng, i),
            "zookeeper" => zookeeper_line(&mut rng, i),
            other => panic!("unknown corpus style {other:?}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out.into_bytes()
}

fn hash_style(style: &str) -> u64 {
    style.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100000001b3)
    })
}

const USERS: &[(&str, u32)] = &[
    ("root", 0),
    ("admin", 500),
    ("test1", 509),
    ("guest", 405),
    ("cyrus", 48),
    ("news", 9),
];

const HOSTS: &[&str] = &[
    "pokemon1.cs.edu",
    "pc180.edu.tw",
    "julia.arkos.de",
    "mail.ref.com",
    "ns2.catalog.com",
    "app-node-07",
];

fn android_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    // Each service runs in its own process: tag, pid and tid co-occur.
    let services: &[(&str, u32, u32)] = &[
        ("PowerManagerService", 1705, 2113),
        ("WindowManager", 1705, 2120),
        ("ActivityManager", 1702, 2101),
        ("BatteryService", 1702, 2146),
    ];
    let (tag, pid, tid) = *pick(rng, services);
    let ms = 100 + (i * 7) % 900;
    match rng.gen_range(0..3) {
        0 => format!(
            "03-17 16:{:02}:{:02}.{:03} {pid} {tid} D {tag}: acquireWakeLockInternal: lock=233570404, flags=0x1, tag=\"RILJ_ACK_WL\", uid=1001, pid={}",
            (i / 60) % 60, i % 60, ms, 2600 + i
        ),
        1 => format!(
            "03-17 16:{:02}:{:02}.{:03} {pid} {tid} I {tag}: Displayed com.example.app/.MainActivity: +{}ms",
            (i / 60) % 60, i % 60, ms, 200 + i % 300
        ),
        _ => format!(
            "03-17 16:{:02}:{:02}.{:03} {pid} {tid} V {tag}: mWakefulness=Awake, mBatteryLevel={}",
            (i / 60) % 60, i % 60, ms, 40 + (i / 200) % 10
        ),
    }
}

fn apache_line(rng: &mut ChaCha8Rng, clock: &mut Clock, i: usize) -> String {
    let time = clock.hms();
    match rng.gen_range(0..4) {
        0 => format!(
            "[Thu Jun 09 {time} 2005] [notice] jk2_init() Found child {} in scoreboard slot {}",
            6500 + i % 400,
            rng.gen_range(6..10)
        ),
        1 => format!("[Thu Jun 09 {time} 2005] [notice] workerEnv.init() ok /etc/httpd/conf/workers2.properties"),
        2 => format!("[Thu Jun 09 {time} 2005] [error] mod_jk child workerEnv in error state {}", rng.gen_range(6..8)),
        _ => format!("[Thu Jun 09 {time} 2005] [error] [client {}] Directory index forbidden by rule: /var/www/html/", pick(rng, &["61.138.216.82", "207.203.80.15", "218.76.139.20"])),
    }
}

fn bgl_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    let node = format!(
        "R{:02}-M1-N{}-C:J{:02}-U{:02}",
        rng.gen_range(0..4) * 10 + 2,
        i % 8,
        12 + i % 6,
        11
    );
    let ts = 1_117_838_570 + i as u64 * 2;
    match rng.gen_range(0..3) {
        0 => format!("- {ts} 2005.06.03 {node} 2005-06-03-15.42.50.363779 {node} RAS KERNEL INFO instruction cache parity error corrected"),
        1 => format!("- {ts} 2005.06.03 {node} 2005-06-03-15.42.50.363779 {node} RAS KERNEL INFO generating core.{}", i % 512),
        _ => format!("- {ts} 2005.06.03 {node} 2005-06-03-15.42.50.363779 {node} RAS KERNEL FATAL data TLB error interrupt"),
    }
}

fn hadoop_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    // One application attempt per worker class; the ids travel together.
    let k = rng.gen_range(0..3);
    let classes = [
        "org.apache.hadoop.mapreduce.v2.app.MRAppMaster",
        "org.apache.hadoop.yarn.event.AsyncDispatcher",
        "org.apache.hadoop.mapred.MapTask",
    ];
    let class = classes[k];
    let attempt = format!("appattempt_1445144423722_{:04}_{:06}", 20 + k, 1 + k);
    format!(
        "2015-10-18 18:{:02}:{:02},{:03} INFO [main] {class}: Created MRAppMaster for application {attempt}",
        (i / 60) % 60,
        i % 60,
        i % 1000,
    )
}

fn hdfs_line(rng: &mut ChaCha8Rng, counters: &mut [u64; 4], i: usize) -> String {
    counters[0] += rng.gen_range(1..900);
    let blk = 38_865_049_064_000_000u64 + counters[0];
    // A small cluster: fixed datanodes, each answering with its own
    // responder index and standard block size.
    let nodes: &[(&str, u32)] = &[
        ("10.250.14.224", 0),
        ("10.250.10.6", 1),
        ("10.250.19.102", 2),
        ("10.251.30.85", 1),
        ("10.251.42.9", 0),
    ];
    let (ip, responder) = *pick(rng, nodes);
    let thread = 140 + responder * 3;
    match rng.gen_range(0..3) {
        0 => format!(
            "081109 20{:02}{:02} {thread} INFO dfs.DataNode$PacketResponder: PacketResponder {responder} for block blk_{blk} terminating",
            (i / 60) % 60, i % 60
        ),
        1 => format!(
            "081109 20{:02}{:02} {thread} INFO dfs.DataNode$PacketResponder: Received block blk_{blk} of size 67108864 from /{ip}",
            (i / 60) % 60, i % 60
        ),
        _ => format!(
            "081109 20{:02}{:02} {thread} INFO dfs.FSNamesystem: BLOCK* NameSystem.addStoredBlock: blockMap updated: {ip}:50010 is added to blk_{blk} size 67108864",
            (i / 60) % 60, i % 60
        ),
    }
}

fn healthapp_line(rng: &mut ChaCha8Rng, counters: &mut [u64; 4], i: usize) -> String {
    counters[1] += rng.gen_range(0..30);
    let steps = 3000 + counters[1];
    match rng.gen_range(0..3) {
        0 => format!("20171223-22:{:02}:{:02}:{:03}|Step_LSC|30002312|onStandStepChanged {steps}", (i / 60) % 60, i % 60, i % 1000),
        1 => format!("20171223-22:{:02}:{:02}:{:03}|Step_SPUtils|30002312|onExtend:1514038530000 14 0 4", (i / 60) % 60, i % 60, i % 1000),
        _ => format!("20171223-22:{:02}:{:02}:{:03}|Step_StandReportReceiver|30002312|calculateCaloriesWithCache totalCalories={}", (i / 60) % 60, i % 60, i % 1000, 120_000 + steps * 40),
    }
}

fn hpc_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    // Each node keeps its command slot and hardware id.
    let k = rng.gen_range(0..12usize);
    let node = format!("node-{}", k * 4 + 2);
    let command = 1900 + k;
    let hwid = 2300 + k;
    let ts = 1_074_119_817u64 + i as u64 * 3;
    match rng.gen_range(0..3) {
        0 => format!("- {} {node} action start {ts} 1 clusterAddMember (command {command})", 2500 + i),
        1 => format!("- {} {node} unix.hw state_change.unavailable {ts} 1 Component State Change: Component \"alt0\" is in the unavailable state (HWID={hwid})", 2500 + i),
        _ => format!("- {} {node} action done {ts} 1 clusterAddMember (command {command})", 2500 + i),
    }
}

fn linux_line(
    rng: &mut ChaCha8Rng,
    clock: &mut Clock,
    counters: &mut [u64; 4],
    i: usize,
) -> String {
    let time = clock.hms();
    counters[2] += 1 + (i as u64 % 3);
    let pid = 19_000 + counters[2];
    match rng.gen_range(0..5) {
        0 | 1 => {
            let (user, uid) = *pick(rng, USERS);
            let host = pick(rng, HOSTS);
            format!(
                "Jun 14 {time} combo sshd(pam_unix)[{pid}]: authentication failure; logname= uid={uid} euid=0 tty=NODEVssh ruser= rhost={host} user={user}"
            )
        }
        2 => {
            let (user, uid) = *pick(rng, USERS);
            format!("Jun 14 {time} combo su(pam_unix)[{pid}]: session opened for user {user} by (uid={uid})")
        }
        3 => format!(
            "Jun 14 {time} combo kernel: audit(111979{:04}.{:03}:{}): initializing netlink socket (disabled)",
            9000 + i % 999, i % 1000, 693_000 + i
        ),
        _ => format!("Jun 14 {time} combo syslogd 1.4.1: restart."),
    }
}

fn mac_line(rng: &mut ChaCha8Rng, clock: &mut Clock) -> String {
    let time = clock.hms();
    let host = "calvisitor-10-105-160-95";
    match rng.gen_range(0..3) {
        0 => format!(
            "Jul  1 {time} {host} kernel[0]: ARPT: {}.{:06}: wl0: wl_update_tcpkeep_seq: Original Seq: {}, Ack: {}",
            620_000 + rng.gen_range(0..999), rng.gen_range(0..999_999),
            rng.gen_range(1_000_000u64..4_000_000_000), rng.gen_range(1_000_000u64..4_000_000_000)
        ),
        1 => format!("Jul  1 {time} {host} com.apple.CDScheduler[43]: Thermal pressure state: 1 Memory pressure state: 0"),
        _ => format!(
            "Jul  1 {time} {host} QQ[10018]: FA||Url||taskID[{}] dealStartUrlSchema",
            2_000_000 + rng.gen_range(0..99)
        ),
    }
}

fn openssh_line(rng: &mut ChaCha8Rng, clock: &mut Clock, counters: &mut [u64; 4]) -> String {
    let time = clock.hms();
    counters[3] += 1;
    let pid = 24_000 + counters[3] / 3;
    let invalid_users = ["webmaster", "oracle", "ftpuser", "test", "nagios"];
    let ips = [
        "173.234.31.186",
        "52.80.34.196",
        "112.95.230.3",
        "187.141.143.180",
    ];
    // Attackers retry: the same (user, ip) pair appears in bursts.
    let k = rng.gen_range(0..invalid_users.len());
    let user = invalid_users[k];
    let ip = ips[k % ips.len()];
    match rng.gen_range(0..4) {
        0 => format!("Dec 10 {time} LabSZ sshd[{pid}]: Failed password for invalid user {user} from {ip} port {} ssh2", 38_000 + rng.gen_range(0..2000)),
        1 => format!("Dec 10 {time} LabSZ sshd[{pid}]: Invalid user {user} from {ip}"),
        2 => format!("Dec 10 {time} LabSZ sshd[{pid}]: pam_unix(sshd:auth): authentication failure; logname= uid=0 euid=0 tty=ssh ruser= rhost={ip}"),
        _ => format!("Dec 10 {time} LabSZ sshd[{pid}]: Received disconnect from {ip}: 11: Bye Bye [preauth]"),
    }
}

fn openstack_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    let tenant = "54fadb412c4e40cdbaed9335e4c35a9e";
    let req = format!(
        "req-{:08x}-{:04x}-{:04x}-{:04x}-{:012x}",
        rng.gen::<u32>(),
        rng.gen::<u16>(),
        rng.gen::<u16>(),
        rng.gen::<u16>(),
        rng.gen::<u64>() & 0xffff_ffff_ffff
    );
    format!(
        "nova-api.log.1.2017-05-16_13:53:08 2017-05-16 00:{:02}:{:02}.{:03} 25746 INFO nova.osapi_compute.wsgi.server [{req} {tenant} {tenant} - - -] 10.11.10.1 \"GET /v2/{tenant}/servers/detail HTTP/1.1\" status: 200 len: {} time: 0.{:07}",
        (i / 60) % 60,
        i % 60,
        i % 1000,
        1700 + i % 300,
        2_000_000 + rng.gen_range(0..5_000_000)
    )
}

fn proxifier_line(rng: &mut ChaCha8Rng, clock: &mut Clock) -> String {
    let time = clock.hms();
    let time = &time[..5];
    let apps = ["chrome.exe", "Dropbox.exe", "thunderbird.exe"];
    let app = pick(rng, &apps);
    match rng.gen_range(0..3) {
        0 => format!("[10.30 {time}] {app} - proxy.cse.cuhk.edu.hk:5070 open through proxy proxy.cse.cuhk.edu.hk:5070 HTTPS"),
        1 => format!(
            "[10.30 {time}] {app} - proxy.cse.cuhk.edu.hk:5070 close, {} bytes sent, {} bytes received, lifetime {:02}:{:02}",
            rng.gen_range(400..9000), rng.gen_range(400..90_000), rng.gen_range(0..10), rng.gen_range(0..60)
        ),
        _ => format!("[10.30 {time}] {app} *64 - mtalk.google.com:5228 open through proxy proxy.cse.cuhk.edu.hk:5070 HTTPS"),
    }
}

fn spark_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    // Task ids are unique and strictly increasing; executors keep their
    // hosts. Rare ids are long-tail residuals, executor/host pairs are
    // frequent combinations.
    let task = i;
    let executors: &[(&str, u32)] = &[("slave01", 1), ("slave02", 2), ("slave07", 7)];
    let (host, eid) = *pick(rng, executors);
    match rng.gen_range(0..3) {
        0 => format!(
            "17/06/09 20:{:02}:{:02} INFO executor.Executor: Finished task {task}.0 in stage 0.0 (TID {task}). {} bytes result sent to driver",
            (i / 60) % 60, i % 60, 2000 + i % 80
        ),
        1 => format!(
            "17/06/09 20:{:02}:{:02} INFO storage.BlockManager: Found block rdd_2_{task} locally on {host}",
            (i / 60) % 60, i % 60
        ),
        _ => format!(
            "17/06/09 20:{:02}:{:02} INFO scheduler.TaskSetManager: Starting task {task}.0 in stage 0.0 (TID {task}, {host}, executor {eid}, partition {task}, PROCESS_LOCAL, {} bytes)",
            (i / 60) % 60, i % 60, 4900 + i % 30
        ),
    }
}

fn thunderbird_line(
    rng: &mut ChaCha8Rng,
    clock: &mut Clock,
    counters: &mut [u64; 4],
    i: usize,
) -> String {
    let time = clock.hms();
    let node = format!("dn{}", 200 + rng.gen_range(0..56));
    counters[0] += 1;
    let ts = 1_131_566_461u64 + i as u64;
    match rng.gen_range(0..3) {
        0 => format!("- {ts} 2005.11.09 {node} Nov 9 {time} {node}/{node} crond(pam_unix)[{}]: session opened for user root by (uid=0)", 2900 + counters[0] % 800),
        1 => format!("- {ts} 2005.11.09 {node} Nov 9 {time} {node}/{node} crond(pam_unix)[{}]: session closed for user root", 2900 + counters[0] % 800),
        _ => format!("- {ts} 2005.11.09 {node} Nov 9 {time} {node}/{node} kernel: e1000: eth0: e1000_clean_tx_irq: Detected Tx Unit Hang"),
    }
}

fn windows_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    match rng.gen_range(0..3) {
        0 => format!(
            "2016-09-28 04:{:02}:{:02}, Info                  CBS    Loaded Servicing Stack v6.1.7601.23505 with Core: C:\\Windows\\winsxs\\amd64_microsoft-windows-servicingstack_31bf3856ad364e35_6.1.7601.23505_none_681aa442f6fed7f0\\cbscore.dll",
            (i / 60) % 60, i % 60
        ),
        1 => format!(
            "2016-09-28 04:{:02}:{:02}, Info                  CSI    00000{:03} [SR] Verifying 100 (0x0000000000000064) components",
            (i / 60) % 60, i % 60, 330 + i % 100
        ),
        _ => format!(
            "2016-09-28 04:{:02}:{:02}, Info                  CBS    SQM: Failed to start upload with file pattern: C:\\Windows\\servicing\\sqm\\*_std.sqm, flags: 0x{:x}",
            (i / 60) % 60, i % 60, rng.gen_range(2..6) * 2
        ),
    }
}

fn zookeeper_line(rng: &mut ChaCha8Rng, i: usize) -> String {
    let port = 3888;
    // Three quorum peers; worker ids and peer ids travel together.
    let peer = rng.gen_range(0..3u64);
    match rng.gen_range(0..3) {
        0 => format!(
            "2015-07-29 17:{:02}:{:02},{:03} - INFO  [QuorumPeer[myid=1]/0.0.0.0:{port}:FastLeaderElection@852] - Notification time out: {}",
            (i / 60) % 60, i % 60, i % 1000, 400 << (i % 5)
        ),
        1 => format!(
            "2015-07-29 17:{:02}:{:02},{:03} - INFO  [/10.10.34.11:{port}:QuorumCnxManager$Listener@493] - Received connection request /10.10.34.{}:{}",
            (i / 60) % 60, i % 60, i % 1000, 12 + peer, 48_000 + rng.gen_range(0..5000)
        ),
        _ => format!(
            "2015-07-29 17:{:02}:{:02},{:03} - WARN  [RecvWorker:{}:QuorumCnxManager$RecvWorker@762] - Connection broken for id {}, my id = 1, error = ",
            (i / 60) % 60, i % 60, i % 1000, 188_978_561_024u64 + peer, 1 + peer
        ),
    }
}

/// One random file for roundtrip fuzzing: random line counts, lines mixing
/// words, numbers, brackets, multi-space gaps, empty lines, occasional raw
/// bytes, and a possibly unterminated tail.
pub fn fuzz_file(seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nlines: usize = match rng.gen_range(0..100) {
        0..=69 => rng.gen_range(0..=100),
        70..=94 => rng.gen_range(100..=1000),
        _ => rng.gen_range(1000..=5000),
    };
    let mut out = Vec::new();
    for i in 0..nlines {
        match rng.gen_range(0..100) {
            0..=4 => {} // empty line
            5..=7 => {
                // spaces only
                let n = rng.gen_range(1..6);
                out.extend(std::iter::repeat_n(b' ', n));
            }
            _ => {
                if rng.gen_bool(0.1) {
                    let n = rng.gen_range(1..4);
                    out.extend(std::iter::repeat_n(b' ', n));
                }
                let ntokens = rng.gen_range(1..12);
                for t in 0..ntokens {
                    if t > 0 {
                        let gap = if rng.gen_bool(0.15) {
                            rng.gen_range(2..6)
                        } else {
                            1
                        };
                        out.extend(std::iter::repeat_n(b' ', gap));
                    }
                    push_fuzz_token(&mut rng, &mut out);
                }
                if rng.gen_bool(0.1) {
                    let n = rng.gen_range(1..4);
                    out.extend(std::iter::repeat_n(b' ', n));
                }
            }
        }
        if i + 1 < nlines || rng.gen_bool(0.7) {
            out.push(b'\n');
        }
    }
    out
}

fn push_fuzz_token(rng: &mut ChaCha8Rng, out: &mut Vec<u8>) {
    match rng.gen_range(0..10) {
        0..=2 => {
            // word
            let n = rng.gen_range(1..10);
            for _ in 0..n {
                out.push(rng.gen_range(b'a'..=b'z'));
            }
        }
        3..=4 => {
            // number, sometimes zero-padded or very long
            let n = match rng.gen_range(0..10) {
                0 => rng.gen_range(18..25),
                _ => rng.gen_range(1..10),
            };
            for k in 0..n {
                let digit = if k == 0 && rng.gen_bool(0.2) {
                    b'0'
                } else {
                    rng.gen_range(b'0'..=b'9')
                };
                out.push(digit);
            }
        }
        5 => {
            // bracketed pid-like
            out.push(b'[');
            let n = rng.gen_range(1..6);
            for _ in 0..n {
                out.push(rng.gen_range(b'0'..=b'9'));
            }
            out.push(b']');
            if rng.gen_bool(0.5) {
                out.push(b':');
            }
        }
        6 => {
            // clock time
            let h = rng.gen_range(0..24);
            let m = rng.gen_range(0..60);
            let s = rng.gen_range(0..60);
            out.extend_from_slice(format!("{h:02}:{m:02}:{s:02}").as_bytes());
        }
        7 => {
            // key=value
            let n = rng.gen_range(1..5);
            for _ in 0..n {
                out.push(rng.gen_range(b'a'..=b'z'));
            }
            out.push(b'=');
            let n = rng.gen_range(1..6);
            for _ in 0..n {
                out.push(rng.gen_range(b'0'..=b'9'));
            }
        }
        8 => {
            // placeholder look-alikes must survive roundtripping
            let fakes: [&[u8]; 5] = [b"<*>", b"<dt>", b"<P>", b"<X>", b"<L4D0Z>"];
            out.extend_from_slice(fakes[rng.gen_range(0..fakes.len())]);
        }
        _ => {
            // raw bytes (no newline, no space)
            let n = rng.gen_range(1..6);
            for _ in 0..n {
                let b = loop {
                    let b: u8 = rng.gen();
                    if b != b'\n' && b != b' ' {
                        break b;
                    }
                };
                out.push(b);
            }
        }
    }
}

/// Write all sixteen dataset samples into `dir`, one file per style.
pub fn write_corpus(
    dir: &std::path::Path,
    lines: usize,
    seed: u64,
) -> std::io::Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::new();
    for style in DATASET_STYLES {
        let path = dir.join(format!("{style}_{lines}.log"));
        std::fs::write(&path, dataset_sample(style, lines, seed))?;
        paths.push(path);
    }
    Ok(paths)
}
